import os
import logging
from pathlib import Path
from typing import Dict, Optional
from dotenv import dotenv_values, load_dotenv

from .exceptions import ExperimentConfigError

logger = logging.getLogger(__name__)

# Load environment variables from .env file
env_path = Path(__file__).parent.parent / ".env"
logger.debug(f"Loading .env from {env_path}")
load_dotenv(env_path)


class Config:
    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Output
    DEFAULT_OUTPUT_DIR: Path = Path(os.getenv("DEFAULT_OUTPUT_DIR", "./output"))

    # Per-J experiment runs executed concurrently
    WORKERS: int = int(os.getenv("WORKERS", "1"))

    # Numerical tolerances
    HERMITIAN_TOL: float = float(os.getenv("HERMITIAN_TOL", "1e-10"))
    NORM_TOL: float = float(os.getenv("NORM_TOL", "1e-9"))
    DEFAULT_STEP: float = float(os.getenv("DEFAULT_STEP", "1e-3"))
    ENERGY_TOL: float = float(os.getenv("ENERGY_TOL", "1e-8"))

    # Largest Hilbert space dimension propagated densely
    MAX_EXACT_DIM: int = int(os.getenv("MAX_EXACT_DIM", "4097"))

    @classmethod
    def setup(cls, output_dir: Optional[Path] = None) -> Path:
        """Create the output directory and return it"""
        target = Path(output_dir) if output_dir is not None else cls.DEFAULT_OUTPUT_DIR
        target.mkdir(parents=True, exist_ok=True)
        return target


EXPERIMENT_KEYS = frozenset(
    {
        "j",
        "epsilon",
        "lambda",
        "mu",
        "theta",
        "phi",
        "q0",
        "p0",
        "t_final",
        "samples",
        "step",
        "scheme",
        "energy_tolerance",
        "out",
        "svg",
        "seed",
        "window",
    }
)


def load_experiment_file(path: str | Path) -> Dict[str, str]:
    """Read a flat ``key = value`` experiment file.

    Args:
        path: Path to the file. ``#`` starts a comment.

    Returns:
        Mapping of lower-cased keys to raw string values.
    """
    path = Path(path)
    if not path.is_file():
        raise ExperimentConfigError(f"Config file {path} does not exist")

    raw = dotenv_values(path, encoding="utf-8")
    values: Dict[str, str] = {}
    for key, value in raw.items():
        name = key.strip().lower().replace("-", "_")
        if name not in EXPERIMENT_KEYS:
            raise ExperimentConfigError(f"Unknown config key '{key}' in {path}")
        if value is None:
            raise ExperimentConfigError(f"Config key '{key}' in {path} has no value")
        values[name] = value.strip()

    logger.debug(f"Loaded {len(values)} keys from {path}")
    return values
