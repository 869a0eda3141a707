"""identities: audit of the c, s, d identity families at random points and the closed forms at 2n*pi*i."""
import logging
from typing import Dict

import numpy as np

from app.commands.output import emit_json, emit_text
from app.schemas import RunConfig
from app.services.ctrig_service import IDENTITY_TOL, N_2NPI_BOUND, ctrig_service

LOG = logging.getLogger(__name__)

AUDIT_POINTS = 500
AUDIT_RADIUS = 10.0
CLOSED_FORM_N = 10


def _random_points(rng: np.random.Generator, count: int) -> np.ndarray:
    radius = AUDIT_RADIUS * np.sqrt(rng.uniform(size=count))
    return radius * np.exp(2j * np.pi * rng.uniform(size=count))


def audit(seed: int = 0, points: int = AUDIT_POINTS) -> Dict[str, float]:
    """Worst scaled residual per identity family."""
    rng = np.random.default_rng(seed)
    z1, z2 = _random_points(rng, points), _random_points(rng, points)
    worst: Dict[str, float] = {}
    for a, b in zip(z1, z2):
        for family, value in ctrig_service.identity_residuals(a, b).items():
            worst[family] = max(worst.get(family, 0.0), value)
    for n in range(-min(CLOSED_FORM_N, N_2NPI_BOUND), min(CLOSED_FORM_N, N_2NPI_BOUND) + 1):
        for family, value in ctrig_service.closed_form_residuals(n).items():
            worst[family] = max(worst.get(family, 0.0), value)
    return dict(sorted(worst.items()))


def table(worst: Dict[str, float]) -> str:
    width = max(len(k) for k in worst)
    lines = [f"{'family'.ljust(width)}  residual    status", "-" * (width + 22)]
    for family, value in worst.items():
        status = "PASS" if value <= IDENTITY_TOL else "FAIL"
        lines.append(f"{family.ljust(width)}  {value:.3e}   {status}")
    return "\n".join(lines) + "\n"


def run(config: RunConfig) -> int:
    worst = audit(config.seed)
    if config.format == "json" and config.output_path is not None:
        emit_json({"tolerance": IDENTITY_TOL, "residuals": worst}, config.output_path)
    else:
        emit_text(table(worst), config.output_path)
    failed = [k for k, v in worst.items() if v > IDENTITY_TOL]
    if failed:
        LOG.warning("identity families above %.0e: %s", IDENTITY_TOL, ", ".join(failed))
        return 1
    return 0
