"""Artifact files: atomic JSON/CSV writes and the readers for potentials, spectra and bundles.

JSON is written with fixed key order and Python's shortest round-trip float
repr, so identical runs produce byte-identical files.
"""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Tuple

from app.errors import OutputError, ParseError
from app.models import Potential, SpectraBundle
from app.schemas import SpectrumData, parse_potential, parse_spectrum
from app.services.forward_service import forward_service

LOG = logging.getLogger(__name__)

BUNDLE_FILES = {
    "sigma_L0": "sigma_L0.json",
    "sigma_v": "sigma_v.json",
    "sigma_v_plus_g": "sigma_v_plus_g.json",
    "sigma_v_plus_ig": "sigma_v_plus_ig.json",
    "sigma_v_plus_h": "sigma_v_plus_h.json",
    "sigma_v_plus_h_tilde": "sigma_v_plus_h_tilde.json",
}


def dumps(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tmp.open("w", encoding="utf-8", newline="") as f:
            f.write(text)
        tmp.replace(path)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}", path=str(path)) from e


def atomic_write_json(path: Path, data: Any) -> None:
    atomic_write_text(path, dumps(data))


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def spectrum_csv(spectrum: SpectrumData) -> str:
    return csv_text(
        ["value", "multiplicity", "tag"],
        ((e.value, e.multiplicity, e.tag.value) for e in spectrum.entries),
    )


def secular_csv(samples: Sequence[Tuple[float, float]]) -> str:
    return csv_text(["z", "Q"], samples)


def read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}", path=str(path)) from e


def read_potential(path: Path) -> Potential:
    return parse_potential(read_text(path))


def read_spectrum(path: Path) -> SpectrumData:
    return parse_spectrum(read_text(path))


def _optional(directory: Path, key: str) -> Optional[SpectrumData]:
    path = directory / BUNDLE_FILES[key]
    return read_spectrum(path) if path.is_file() else None


def read_bundle(directory: Path, route: str = "four") -> SpectraBundle:
    """Load a bundle directory; sigma_L0.json is synthesized when absent."""
    directory = Path(directory)
    sigma_v = _optional(directory, "sigma_v")
    if sigma_v is None:
        raise ParseError(f"{directory} has no {BUNDLE_FILES['sigma_v']}", path=str(directory))
    sigma_L0 = _optional(directory, "sigma_L0")
    if sigma_L0 is None:
        LOG.info("no %s in %s, using the analytic sigma(L0)", BUNDLE_FILES["sigma_L0"], directory)
        sigma_L0 = forward_service.unperturbed_spectrum(sigma_v.truncation_N)
    h_key = "sigma_v_plus_h_tilde" if route == "odd" else "sigma_v_plus_h"
    return SpectraBundle(
        sigma_L0=sigma_L0,
        sigma_v=sigma_v,
        sigma_v_plus_g=_optional(directory, "sigma_v_plus_g"),
        sigma_v_plus_ig=_optional(directory, "sigma_v_plus_ig"),
        sigma_v_plus_h=_optional(directory, h_key),
    )


def write_bundle(directory: Path, bundle: SpectraBundle, route: str = "four") -> list:
    """Write every present spectrum of ``bundle``; returns the written paths."""
    directory = Path(directory)
    h_key = "sigma_v_plus_h_tilde" if route == "odd" else "sigma_v_plus_h"
    parts = [
        ("sigma_L0", bundle.sigma_L0),
        ("sigma_v", bundle.sigma_v),
        ("sigma_v_plus_g", bundle.sigma_v_plus_g),
        ("sigma_v_plus_ig", bundle.sigma_v_plus_ig),
        (h_key, bundle.sigma_v_plus_h),
    ]
    written = []
    for key, spectrum in parts:
        if spectrum is None:
            continue
        path = directory / BUNDLE_FILES[key]
        atomic_write_json(path, spectrum.model_dump(mode="json"))
        written.append(path)
    return written
