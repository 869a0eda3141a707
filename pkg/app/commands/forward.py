"""forward: spectrum of L_alpha for a potential file, plus (z, Q(z)) plot samples."""
import logging
from pathlib import Path

from app.commands.output import emit_json, emit_text
from app.models import PerturbedOperator
from app.schemas import RunConfig
from app.services.forward_service import forward_service
from app.storage import atomic_write_text, read_potential, secular_csv, spectrum_csv

LOG = logging.getLogger(__name__)


def run(config: RunConfig) -> int:
    v = read_potential(config.potential_path)
    op = PerturbedOperator(config.alpha, v, config.truncation_N)
    spectrum = forward_service.compute_spectrum(op)
    LOG.info("forward: %s, alpha=%g, N=%d -> %d eigenvalues",
             v.describe(), config.alpha, config.truncation_N, len(spectrum.entries))

    if config.format == "csv":
        emit_text(spectrum_csv(spectrum), config.output_path)
    else:
        emit_json(spectrum.model_dump(mode="json"), config.output_path)

    if config.output_path is not None:
        samples = forward_service.secular_samples(forward_service.secular(op))
        path = Path(f"{config.output_path}.secular.csv")
        atomic_write_text(path, secular_csv(samples))
        LOG.info("wrote %d secular samples to %s", len(samples), path)
    return 0
