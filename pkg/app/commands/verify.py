"""verify: forward -> inverse round trip on (alpha, v), reporting the max coefficient error."""
import logging
import math
from typing import Dict, Tuple

import numpy as np

from app.commands.output import emit_json
from app.config import settings
from app.models import PerturbedOperator, Potential
from app.schemas import RunConfig
from app.services.inverse_service import inverse_service
from app.services.potential_service import potential_service
from app.storage import read_potential

LOG = logging.getLogger(__name__)

MAX_RANDOM_MODES = 6
RANDOM_SUPPORT = 4


def random_case(seed: int, route: str = "four") -> Tuple[float, Potential]:
    """Seeded (alpha, v): at most six modes in |n| <= 4, ||v|| = 1, 0.5 <= |alpha| <= 5.

    Even routes draw real coefficients, odd routes imaginary ones.
    """
    rng = np.random.default_rng(seed)
    count = int(rng.integers(1, MAX_RANDOM_MODES + 1))
    modes = rng.choice(np.arange(-RANDOM_SUPPORT, RANDOM_SUPPORT + 1), size=count, replace=False)
    if route == "even":
        values = rng.normal(size=count).astype(complex)
    elif route == "odd":
        values = 1j * rng.normal(size=count)
    else:
        values = rng.normal(size=count) + 1j * rng.normal(size=count)
    values = values / np.linalg.norm(values)
    alpha = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 5.0))
    return alpha, Potential.fourier({int(n): complex(c) for n, c in zip(modes, values)})


def coefficient_error(expected: Dict[int, complex], recovered: Dict[int, complex]) -> float:
    modes = set(expected) | set(recovered)
    return max((abs(expected.get(n, 0j) - recovered.get(n, 0j)) for n in modes), default=0.0)


def run(config: RunConfig) -> int:
    if config.potential_path is not None:
        v = read_potential(config.potential_path)
        alpha = config.alpha if config.alpha is not None else random_case(config.seed, config.route)[0]
    else:
        alpha, v = random_case(config.seed, config.route)
        if config.alpha is not None:
            alpha = config.alpha
    n_max = config.truncation_N
    if v.norm > 0.0:
        v = potential_service.normalize(v, n_max)
    op = PerturbedOperator(alpha, v, n_max)

    bundle = inverse_service.build_bundle(op, config.route)
    if config.route == "four":
        result = inverse_service.reconstruct_four_spectra(bundle)
    else:
        result = inverse_service.reconstruct_three_spectra(bundle, config.route)

    expected = v.coefficient_map()
    error = coefficient_error(expected, result.coefficient_map())
    if result.alpha is None:
        # v = 0 leaves alpha unidentifiable
        alpha_error = 0.0 if v.norm == 0.0 else math.inf
    else:
        alpha_error = abs(result.alpha - alpha) / abs(alpha)
    report = {
        "route": config.route,
        "seed": config.seed,
        "alpha": alpha,
        "recovered_alpha": result.alpha,
        "max_coefficient_error": error,
        "alpha_relative_error": alpha_error,
        "tolerance": settings.recon_tol,
    }
    emit_json(report, config.output_path)
    LOG.info("verify: max coefficient error %.3g, alpha error %.3g", error, alpha_error)
    return 0 if error <= settings.recon_tol and alpha_error <= settings.recon_tol else 1
