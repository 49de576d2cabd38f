"""Environment settings and per-run configuration."""
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

DEFAULT_RECOVERY_BUDGET = 1_000_000
DEFAULT_TOLERANCE = 1e-9
# largest relative spread of F/Ṽ accepted as a constant ratio
CONSTANT_SPREAD_TOLERANCE = 1e-10
MIN_VALIDATION_TRIALS = 100
DEFAULT_TRIALS = 200
DEFAULT_MC_SAMPLES = 100_000

# registry/functionals next to the package when running from a checkout
DEFAULT_REGISTRY_PATH = str(Path(__file__).resolve().parent.parent / "registry" / "functionals")


def _env_int(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from e


@dataclass
class Settings:
    """Process-wide settings read from the environment (and ``.env``)."""
    log_level: str = "WARNING"
    log_file: Optional[str] = None
    recovery_budget: int = DEFAULT_RECOVERY_BUDGET
    workers: int = 1
    registry_path: str = DEFAULT_REGISTRY_PATH
    default_seed: Optional[int] = None

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from ``DMV_*`` environment variables."""
        return cls(
            log_level=os.getenv("DMV_LOG_LEVEL", "WARNING"),
            log_file=os.getenv("DMV_LOG_FILE") or None,
            recovery_budget=_env_int("DMV_RECOVERY_BUDGET", DEFAULT_RECOVERY_BUDGET),
            workers=max(1, _env_int("DMV_WORKERS", 1)),
            registry_path=os.getenv("DMV_REGISTRY_PATH", DEFAULT_REGISTRY_PATH),
            default_seed=_env_int("DMV_SEED", None),
        )


@dataclass
class RunConfig:
    """One CLI invocation."""
    subcommand: str
    inputs: List[str] = field(default_factory=list)
    grid_spec: Optional[str] = None
    tolerance: float = DEFAULT_TOLERANCE
    trials: int = DEFAULT_TRIALS
    seed: Optional[int] = None
    output: Optional[str] = None
    output_format: str = "json"

    def require_seed(self) -> int:
        """Return the seed, failing when a stochastic path has none."""
        if self.seed is None:
            raise ValueError(f"--seed (or DMV_SEED) is required for '{self.subcommand}'")
        return self.seed
