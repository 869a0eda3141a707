"""Error hierarchy.

Every failure a service can report is a ``TrispecError`` subclass with a
stable machine-readable ``code``. The command line turns them into a
single-line JSON diagnostic on stderr.
"""
from typing import Any, Dict


class TrispecError(Exception):
    """Base class for all domain errors."""

    code = "trispec_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"error": self.code, "message": self.message}
        if self.details:
            payload["details"] = {k: _plain(v) for k, v in self.details.items()}
        return payload


def _plain(value: Any) -> Any:
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)


class OverflowDomain(TrispecError):
    """An exponential left the double-precision range."""

    code = "overflow_domain"


class AliasRisk(TrispecError):
    """A sample grid cannot resolve the requested Fourier mode."""

    code = "alias_risk"


class NearZeroLambda(TrispecError):
    """The characteristic function was asked for at |lambda| < 1e-4."""

    code = "near_zero_lambda"


class TruncationTooSmall(TrispecError):
    code = "truncation_too_small"


class PoleProximity(TrispecError):
    """The spectral parameter sits on (or next to) the spectrum."""

    code = "pole_proximity"


class NoConvergence(TrispecError):
    code = "no_convergence"


class InconsistentSpectra(TrispecError):
    """Input spectra violate interlacing or do not share a window."""

    code = "inconsistent_spectra"


class SlowConvergence(TrispecError):
    code = "slow_convergence"


class SignInconsistency(TrispecError):
    code = "sign_inconsistency"


class NormMismatch(TrispecError):
    code = "norm_mismatch"


class SymmetryViolation(TrispecError):
    code = "symmetry_violation"


class ConfigError(TrispecError):
    code = "config_error"


class ParseError(TrispecError):
    code = "parse_error"


class OutputError(TrispecError):
    """An artifact could not be written."""

    code = "output_error"
