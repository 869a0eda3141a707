"""Pydantic schemas for input files and output artifacts."""
import math
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from app.errors import ParseError
from app.models import Branch, Potential, PotentialKind, SpectrumTag


# ============================================================================
# Potential Schemas
# ============================================================================

class FourierCoefficient(BaseModel):
    n: int
    re: float
    im: float = 0.0

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


class FourierPotentialSpec(BaseModel):
    type: Literal["fourier"]
    coeffs: List[FourierCoefficient] = []

    def to_potential(self) -> Potential:
        seen = set()
        for c in self.coeffs:
            if c.n in seen:
                raise ParseError(f"duplicate Fourier mode n={c.n}")
            seen.add(c.n)
        return Potential.fourier({c.n: c.value for c in self.coeffs})


class SamplesPotentialSpec(BaseModel):
    type: Literal["samples"]
    values: List[Tuple[float, float]] = Field(min_length=16)

    def to_potential(self) -> Potential:
        return Potential.from_samples([complex(re, im) for re, im in self.values])


class NamedPotentialSpec(BaseModel):
    type: Literal["named"]
    name: Literal["unit", "g", "h", "h_tilde"]

    def to_potential(self) -> Potential:
        return Potential.named(self.name)


PotentialSpec = Annotated[
    Union[FourierPotentialSpec, SamplesPotentialSpec, NamedPotentialSpec],
    Field(discriminator="type"),
]
_potential_adapter = TypeAdapter(PotentialSpec)


def parse_potential(raw: Union[str, bytes, dict]) -> Potential:
    """Parse the potential JSON format into a ``Potential``."""
    try:
        if isinstance(raw, dict):
            spec = _potential_adapter.validate_python(raw)
        else:
            spec = _potential_adapter.validate_json(raw)
        return spec.to_potential()
    except ValidationError as e:
        raise ParseError(f"invalid potential: {e.errors()[0]['msg']}") from e
    except ValueError as e:
        raise ParseError(f"invalid potential: {e}") from e


def potential_to_dict(v: Potential) -> dict:
    if v.kind is PotentialKind.FOURIER:
        return {
            "type": "fourier",
            "coeffs": [{"n": n, "re": c.real, "im": c.imag} for n, c in v.coeffs],
        }
    if v.kind is PotentialKind.SAMPLES:
        return {"type": "samples", "values": [[c.real, c.imag] for c in v.samples]}
    return {"type": "named", "name": v.name}


# ============================================================================
# Spectrum Schemas
# ============================================================================

class SpectrumEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    multiplicity: Literal[1, 2] = 1
    tag: SpectrumTag = SpectrumTag.SIGMA0

    @model_validator(mode="after")
    def check_multiplicity(self):
        if (self.multiplicity == 2) != (self.tag is SpectrumTag.BOTH):
            raise ValueError("multiplicity 2 goes with tag sigma0_and_sigma2 and only with it")
        return self

    @property
    def in_sigma0(self) -> bool:
        return self.tag in (SpectrumTag.SIGMA0, SpectrumTag.BOTH)

    @property
    def in_sigma2(self) -> bool:
        return self.tag in (SpectrumTag.SIGMA2, SpectrumTag.BOTH)


class SpectrumData(BaseModel):
    model_config = ConfigDict(frozen=True)

    truncation_N: int
    entries: List[SpectrumEntry] = []

    @model_validator(mode="after")
    def check_sorted(self):
        values = [e.value for e in self.entries]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("spectrum values must be strictly increasing")
        return self

    @property
    def values(self) -> List[float]:
        return [e.value for e in self.entries]

    @property
    def sigma0(self) -> List[float]:
        return [e.value for e in self.entries if e.in_sigma0]

    @property
    def sigma2(self) -> List[float]:
        return [e.value for e in self.entries if e.in_sigma2]

    def with_multiplicity(self) -> List[float]:
        """Values repeated according to multiplicity."""
        out: List[float] = []
        for e in self.entries:
            out.extend([e.value] * e.multiplicity)
        return out


def parse_spectrum(raw: Union[str, bytes]) -> SpectrumData:
    try:
        return SpectrumData.model_validate_json(raw)
    except ValidationError as e:
        raise ParseError(f"invalid spectrum: {e.errors()[0]['msg']}") from e


# ============================================================================
# Inverse Result Schemas
# ============================================================================

class ComplexOut(BaseModel):
    re: float
    im: float

    @classmethod
    def of(cls, z: complex) -> "ComplexOut":
        return cls(re=z.real, im=z.imag)


class CoefficientOut(BaseModel):
    n: int
    re: float
    im: float


class WeightOut(BaseModel):
    n: int
    value: float


class ResidualOut(BaseModel):
    n: int
    value: float


class InverseResult(BaseModel):
    """Recovered (alpha, {v_n}); alpha is None when v = 0 makes it unidentifiable."""

    alpha: Optional[float]
    coefficients: List[CoefficientOut] = []
    weights: List[WeightOut] = []
    branch: Optional[Branch] = None
    residuals: List[ResidualOut] = []
    leading_constant: Optional[ComplexOut] = None
    diagnostics: Dict[str, Union[float, str, bool]] = {}

    def coefficient_map(self) -> Dict[int, complex]:
        return {c.n: complex(c.re, c.im) for c in self.coefficients}

    def weight_map(self) -> Dict[int, float]:
        return {w.n: w.value for w in self.weights}

    def to_potential(self) -> Potential:
        return Potential.fourier(self.coefficient_map())


# ============================================================================
# Run Config Schemas
# ============================================================================

class RunConfig(BaseModel):
    command: Literal["forward", "inverse4", "inverse3", "verify", "identities", "bundle"]
    potential_path: Optional[Path] = None
    bundle_dir: Optional[Path] = None
    alpha: Optional[float] = None
    truncation_N: int = Field(default=16, ge=8)
    tol: Optional[float] = Field(default=None, gt=0)
    output_path: Optional[Path] = None
    format: Literal["json", "csv"] = "json"
    symmetry: Optional[Literal["even", "odd"]] = None
    route: Literal["four", "even", "odd"] = "four"
    seed: int = 0

    @model_validator(mode="after")
    def check_inputs(self):
        if self.alpha is not None and not math.isfinite(self.alpha):
            raise ValueError(f"--alpha must be finite, got {self.alpha}")
        if self.potential_path is not None and not self.potential_path.is_file():
            raise ValueError(f"potential file not found: {self.potential_path}")
        if self.bundle_dir is not None and not self.bundle_dir.is_dir():
            raise ValueError(f"bundle directory not found: {self.bundle_dir}")
        if self.command in ("forward", "bundle") and self.potential_path is None:
            raise ValueError(f"{self.command} needs --potential")
        if self.command in ("forward", "bundle") and self.alpha is None:
            raise ValueError(f"{self.command} needs --alpha")
        if self.command in ("inverse4", "inverse3") and self.bundle_dir is None:
            raise ValueError(f"{self.command} needs --bundle")
        if self.command == "inverse3" and self.symmetry is None:
            raise ValueError("inverse3 needs --symmetry even|odd")
        return self
