"""Characterize the mixed-volume functional and one gallery counterexample on a small grid."""
import os

from dotenv import load_dotenv

from dualvol.characterize.pipeline import characterize
from dualvol.core.sphere import make_grid
from dualvol.functionals.implementations import mixed_volume_functional
from dualvol.functionals.registry import FunctionalRegistry
from dualvol.io.reports import format_json
from dualvol.utils.logging import get_logger, setup_logging

# Load environment variables
load_dotenv()

# Setup logging
setup_logging(log_level=os.getenv("DMV_LOG_LEVEL", "INFO"))
logger = get_logger("dmv.example")


def main():
    grid = make_grid(2, m=16)
    seed = int(os.getenv("DMV_SEED", "7"))

    report = characterize(mixed_volume_functional(2, 2.5, grid), grid, trials=50, seed=seed)
    logger.info(f"2.5*dmv -> {report.conclusion.value}")
    print(format_json(report.to_dict()))

    registry = FunctionalRegistry()
    counterexample = registry.build("product-of-integrals", 2, grid)
    report = characterize(counterexample, grid, trials=50, seed=seed)
    logger.info(f"{counterexample.name} -> {report.conclusion.value} (culprit: {report.culprit})")


if __name__ == "__main__":
    main()
