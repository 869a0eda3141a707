"""inverse4 / inverse3: reconstruct (alpha, v) from a bundle directory."""
import logging

from app.commands.output import emit_json
from app.config import settings
from app.schemas import InverseResult, RunConfig
from app.services.inverse_service import inverse_service
from app.storage import read_bundle

LOG = logging.getLogger(__name__)


def _finish(result: InverseResult, config: RunConfig) -> int:
    emit_json(result.model_dump(mode="json"), config.output_path)
    residual = result.diagnostics.get("spectral_residual", 0.0)
    if residual > settings.recon_tol:
        LOG.warning("spectral residual %.3g exceeds tolerance %.3g", residual, settings.recon_tol)
        return 1
    return 0


def run_four(config: RunConfig) -> int:
    bundle = read_bundle(config.bundle_dir, "four")
    return _finish(inverse_service.reconstruct_four_spectra(bundle), config)


def run_three(config: RunConfig) -> int:
    bundle = read_bundle(config.bundle_dir, config.symmetry)
    return _finish(inverse_service.reconstruct_three_spectra(bundle, config.symmetry), config)
