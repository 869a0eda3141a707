"""Application configuration."""
from contextlib import contextmanager

from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    # App settings
    app_name: str = "Trispec"
    app_version: str = "1.0.0"
    debug: bool = False
    log_level: str = "INFO"

    # Parallelism (TRISPEC_THREADS)
    threads: int = 4

    # Truncation: modes -N..N are retained
    truncation_n: int = 16
    min_truncation_n: int = 8

    # Spectral tolerances
    drop_tol: float = 1e-12       # |v_n| <= drop_tol * ||v|| counts as zero
    match_tol: float = 1e-8       # relative to max(1, |z|)
    cluster_tol: float = 1e-7     # relative to max(1, |z|)
    root_tol: float = 1e-15       # relative bracket width
    pole_tol: float = 1e-8        # distance of z from the spectrum
    recon_tol: float = 1e-6

    # Quadrature
    quad_order: int = 32
    quad_panels: int = 8
    quad_tol: float = 1e-11
    quad_max_panels: int = 1024

    # Series and products
    series_min_modes: int = 64
    hadamard_factors: int = 200
    richardson_base: float = 1e3
    richardson_levels: int = 4
    richardson_tol: float = 1e-4

    # Artifacts
    data_dir: str = "data"

    model_config = SettingsConfigDict(
        env_prefix="TRISPEC_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    def apply_overrides(self, **overrides) -> None:
        """Replace fields in place for the current run; None values are ignored."""
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in type(self).model_fields:
                raise KeyError(key)
            setattr(self, key, value)

    @contextmanager
    def overridden(self, **overrides):
        """Apply overrides for the duration of a block, then restore the previous values."""
        saved = {k: getattr(self, k) for k, v in overrides.items() if v is not None and k in type(self).model_fields}
        self.apply_overrides(**overrides)
        try:
            yield self
        finally:
            for key, value in saved.items():
                setattr(self, key, value)


settings = Settings()
