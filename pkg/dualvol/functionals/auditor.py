"""Property auditor: runs named checks with error handling and logging."""
from typing import Dict, List, Optional, Sequence

from dualvol.config import DEFAULT_TOLERANCE, DEFAULT_TRIALS
from dualvol.core.sphere import SphereGrid
from dualvol.functionals.base import Functional
from dualvol.functionals.checks import CHECKS, PropertyReport, Verdict
from dualvol.utils.logging import get_logger

DEFAULT_CHECKS = ("additive", "positive", "homogeneous", "vanishing", "rotation")


class PropertyAuditor:
    """Runs property checks against one functional."""

    def __init__(
        self,
        functional: Functional,
        grid: Optional[SphereGrid] = None,
        trials: int = DEFAULT_TRIALS,
        seed: int = 0,
        tol: float = DEFAULT_TOLERANCE
    ):
        """Initialize property auditor.

        Args:
            functional: Functional under test
            grid: Grid for the random inputs (defaults to the functional's grid)
            trials: Random trials per check
            seed: Seed shared by every check
            tol: Relative tolerance
        """
        self.functional = functional
        self.grid = grid or functional.grid
        self.trials = trials
        self.seed = seed
        self.tol = tol
        self.logger = get_logger("dmv.checks.auditor")

    def run_check(self, name: str) -> PropertyReport:
        """Run one check.

        Args:
            name: Check name (additive, positive, increasing, homogeneous, vanishing, rotation)

        Returns:
            Property report; exceptions become failed reports
        """
        self.logger.info(f"Running check: {name} on {self.functional.name}")

        check = CHECKS.get(name)

        if not check:
            return PropertyReport(
                name, Verdict.FAIL, tolerance=self.tol, note=f"Check not found: {name}"
            )

        try:
            report = check(
                self.functional, self.grid, trials=self.trials, seed=self.seed, tol=self.tol
            )
            self.logger.info(f"Check {name} completed: {report.verdict.value}")
            return report

        except Exception as e:
            self.logger.error(f"Check {name} failed with an error: {e}")
            return PropertyReport(
                name, Verdict.FAIL, tolerance=self.tol, note=f"{type(e).__name__}: {e}"
            )

    def run(self, names: Sequence[str] = DEFAULT_CHECKS) -> List[PropertyReport]:
        """Run several checks in order."""
        return [self.run_check(name) for name in names]

    def summary(self, reports: Sequence[PropertyReport]) -> Dict:
        return {
            "functional": self.functional.describe(),
            "grid": self.grid.grid_id if self.grid is not None else None,
            "trials": self.trials,
            "seed": self.seed,
            "reports": [report.to_dict() for report in reports],
            "passed": not any(report.failed for report in reports),
        }

    @staticmethod
    def available_checks() -> List[str]:
        return list(CHECKS)
