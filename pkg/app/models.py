"""Immutable domain value types shared by the services."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Dict, Iterator, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.errors import ConfigError, InconsistentSpectra, TruncationTooSmall

if TYPE_CHECKING:
    from app.schemas import SpectrumData

TWO_PI = 2.0 * math.pi


def mode_eigenvalue(n: int) -> float:
    """z_n = (2n*pi)^3, the n-th eigenvalue of the unperturbed operator.

    Every module takes z_n from here so that equal modes compare equal bitwise.
    """
    return (TWO_PI * n) ** 3


def mode_index(z: float) -> int:
    """Inverse of ``mode_eigenvalue`` for values on (or next to) the lattice."""
    return int(round(float(np.cbrt(z)) / TWO_PI))


# ============================================================================
# Enumerations
# ============================================================================

class PotentialKind(str, Enum):
    FOURIER = "fourier"
    SAMPLES = "samples"
    NAMED = "named"


class Symmetry(str, Enum):
    EVEN = "even"
    ODD = "odd"
    NONE = "none"


class Branch(str, Enum):
    ZERO_IN_SPECTRUM = "zero_in_spectrum"
    ZERO_NOT_IN_SPECTRUM = "zero_not_in_spectrum"


class SpectrumTag(str, Enum):
    SIGMA0 = "sigma0"
    SIGMA2 = "sigma2"
    BOTH = "sigma0_and_sigma2"


NAMED_FORMS = ("unit", "g", "h", "h_tilde")

# ||v||^2 of the named closed forms
_NAMED_NORM_SQ = {"unit": 1.0, "g": 1.0 / 3.0, "h": 1.0 / 80.0, "h_tilde": 1.0 / 80.0}


# ============================================================================
# ctrig
# ============================================================================

@dataclass(frozen=True)
class CsdTriple:
    c: complex
    s: complex
    d: complex

    def __iter__(self) -> Iterator[complex]:
        return iter((self.c, self.s, self.d))

    def conjugate(self) -> "CsdTriple":
        return CsdTriple(self.c.conjugate(), self.s.conjugate(), self.d.conjugate())


# ============================================================================
# potential
# ============================================================================

@dataclass(frozen=True)
class Potential:
    """A potential v in L^2(0,1).

    Three representations are supported: a finite Fourier series in the
    basis e^{2n*pi*i*x}, uniform samples x_j = j/count on the periodic grid,
    and a named closed form. Build instances through the classmethods.
    """

    kind: PotentialKind
    coeffs: Tuple[Tuple[int, complex], ...] = ()
    samples: Tuple[complex, ...] = ()
    name: str = ""
    reflected: bool = False
    norm_cache: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.kind is PotentialKind.SAMPLES and len(self.samples) < 16:
            raise ValueError(f"sample grid needs at least 16 points, got {len(self.samples)}")
        if self.kind is PotentialKind.NAMED and self.name not in NAMED_FORMS:
            raise ValueError(f"unknown named potential {self.name!r}")
        object.__setattr__(self, "norm_cache", math.sqrt(self._norm_sq()))

    # -- constructors ---------------------------------------------------

    @classmethod
    def fourier(cls, coeffs: Mapping[int, complex]) -> "Potential":
        items = tuple(sorted((int(n), complex(c)) for n, c in coeffs.items()))
        ns = [n for n, _ in items]
        if len(set(ns)) != len(ns):
            raise ValueError("duplicate Fourier modes")
        return cls(kind=PotentialKind.FOURIER, coeffs=items)

    @classmethod
    def mode(cls, n: int, amplitude: complex = 1.0) -> "Potential":
        """u_n scaled by ``amplitude``."""
        return cls.fourier({n: amplitude})

    @classmethod
    def zero(cls) -> "Potential":
        return cls.fourier({})

    @classmethod
    def from_samples(cls, values: Sequence[complex]) -> "Potential":
        return cls(kind=PotentialKind.SAMPLES, samples=tuple(complex(v) for v in values))

    @classmethod
    def named(cls, name: str, reflected: bool = False) -> "Potential":
        return cls(kind=PotentialKind.NAMED, name=name, reflected=reflected)

    # -- views ----------------------------------------------------------

    @property
    def norm(self) -> float:
        return self.norm_cache

    @property
    def is_fourier(self) -> bool:
        return self.kind is PotentialKind.FOURIER

    @property
    def count(self) -> int:
        return len(self.samples)

    @property
    def support(self) -> int:
        """Largest |n| carried by a Fourier series (0 for the empty series)."""
        return max((abs(n) for n, _ in self.coeffs), default=0)

    def coefficient_map(self) -> Dict[int, complex]:
        return dict(self.coeffs)

    def describe(self) -> str:
        if self.kind is PotentialKind.FOURIER:
            return f"fourier[{len(self.coeffs)} modes, support {self.support}]"
        if self.kind is PotentialKind.SAMPLES:
            return f"samples[{self.count}]"
        return f"named[{self.name}{', reflected' if self.reflected else ''}]"

    def _norm_sq(self) -> float:
        if self.kind is PotentialKind.FOURIER:
            return math.fsum(abs(c) ** 2 for _, c in self.coeffs)
        if self.kind is PotentialKind.SAMPLES:
            # trapezoid rule on the periodic grid == Parseval of the DFT
            values = np.asarray(self.samples)
            return float(np.mean(np.abs(values) ** 2))
        return _NAMED_NORM_SQ[self.name]


@dataclass(frozen=True)
class TransformPack:
    """Fourier-type transforms of v and w(x) = v(1-x) at one lambda.

    ``*_star`` fields hold the involution f*(lambda) = conj(f(conj(lambda))).
    """

    lam: complex
    vc: complex
    vs: complex
    vd: complex
    vc_star: complex
    vs_star: complex
    vd_star: complex
    wc: complex
    ws: complex
    wd: complex
    wc_star: complex
    ws_star: complex
    wd_star: complex
    m: complex
    m_star: complex


# ============================================================================
# forward
# ============================================================================

@dataclass(frozen=True)
class PerturbedOperator:
    """L_alpha y = i y''' + alpha <y, v> v with periodic boundary conditions."""

    alpha: float
    v: Potential
    truncation_n: int = field(default_factory=lambda: settings.truncation_n)
    tol: float = field(default_factory=lambda: settings.root_tol)

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ConfigError(f"alpha must be finite, got {self.alpha}", alpha=str(self.alpha))
        if self.truncation_n < settings.min_truncation_n:
            raise TruncationTooSmall(
                f"truncation N={self.truncation_n} is below the minimum {settings.min_truncation_n}",
                truncation_n=self.truncation_n,
            )
        if self.v.is_fourier and self.v.support > self.truncation_n:
            raise TruncationTooSmall(
                f"potential support {self.v.support} exceeds truncation N={self.truncation_n}",
                support=self.v.support,
                truncation_n=self.truncation_n,
            )

    @property
    def window(self) -> Tuple[float, float]:
        return mode_eigenvalue(-self.truncation_n), mode_eigenvalue(self.truncation_n)


@dataclass(frozen=True)
class SecularFunction:
    """Q(z) = 1 + alpha * G(z), G(z) = sum |v_k|^2 / (z_k - z) over the active poles."""

    alpha: float
    modes: Tuple[int, ...]
    poles: Tuple[float, ...]
    weights: Tuple[float, ...]
    coefficients: Tuple[complex, ...]

    @cached_property
    def _poles(self) -> np.ndarray:
        return np.asarray(self.poles, dtype=float)

    @cached_property
    def _weights(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @property
    def total_weight(self) -> float:
        return math.fsum(self.weights)

    def g(self, z):
        z = np.asarray(z)
        diff = self._poles - z[..., None]
        return np.sum(self._weights / diff, axis=-1)

    def g_prime(self, z):
        z = np.asarray(z)
        diff = self._poles - z[..., None]
        return np.sum(self._weights / diff**2, axis=-1)

    def __call__(self, z):
        return 1.0 + self.alpha * self.g(z)

    def derivative(self, z):
        return self.alpha * self.g_prime(z)


@dataclass(frozen=True, eq=False)
class ResolventSamples:
    values: np.ndarray
    tail_bound: float = 0.0


# ============================================================================
# oracle
# ============================================================================

@dataclass(frozen=True, eq=False)
class TruncatedModel:
    n: int
    modes: np.ndarray
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class OracleEigenvalue:
    value: float
    multiplicity: int = 1


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray
    sweeps: int


# ============================================================================
# inverse
# ============================================================================

@dataclass(frozen=True)
class Classification:
    sigma0: Tuple[float, ...]
    sigma1: Tuple[float, ...]
    sigma2: Tuple[float, ...]
    sigma1_modes: Tuple[int, ...]
    branch: Branch
    alpha_sign: int

    @property
    def unperturbed(self) -> bool:
        return not self.sigma1 and not self.sigma2


@dataclass(frozen=True)
class SpectralData:
    """Two-spectra data: alpha and |v_n|^2 under the normalization ||v|| = 1."""

    alpha: float
    weights: Dict[int, float]
    moduli_sq: Dict[int, float]
    branch: Branch
    constant: complex


@dataclass(frozen=True)
class SpectraBundle:
    sigma_L0: "SpectrumData"
    sigma_v: "SpectrumData"
    sigma_v_plus_g: Optional["SpectrumData"] = None
    sigma_v_plus_ig: Optional["SpectrumData"] = None
    sigma_v_plus_h: Optional["SpectrumData"] = None

    def __post_init__(self):
        windows = {
            s.truncation_N
            for s in (self.sigma_L0, self.sigma_v, self.sigma_v_plus_g,
                      self.sigma_v_plus_ig, self.sigma_v_plus_h)
            if s is not None
        }
        if len(windows) > 1:
            raise InconsistentSpectra(f"spectra use different truncation windows: {sorted(windows)}")

    @property
    def truncation_n(self) -> int:
        return self.sigma_L0.truncation_N

