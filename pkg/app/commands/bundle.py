"""bundle: forward-generate the spectra a reconstruction route needs and write them to a directory."""
import logging
from pathlib import Path

from app.config import settings
from app.models import PerturbedOperator
from app.schemas import RunConfig
from app.services.inverse_service import inverse_service
from app.storage import read_potential, write_bundle

LOG = logging.getLogger(__name__)


def run(config: RunConfig) -> int:
    v = read_potential(config.potential_path)
    op = PerturbedOperator(config.alpha, v, config.truncation_N)
    bundle = inverse_service.build_bundle(op, config.route)
    directory = config.output_path or Path(settings.data_dir) / "bundle"
    written = write_bundle(directory, bundle, config.route)
    for path in written:
        print(path)
    LOG.info("bundle (%s route) written to %s", config.route, directory)
    return 0
