"""Characterization pipeline: which representation does a functional admit?

The stages follow the hypotheses in order. Additivity and positivity (or
monotonicity, for real-valued functionals) give a kernel; vanishing on disjoint
arguments concentrates it on the diagonal; rotation invariance makes the diagonal
density constant, so that ``F = c·Ṽ``.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from dualvol.characterize.diagnostics import (
    ConstantEstimate,
    DiagonalityResult,
    UniformityResult,
    diagonality_test,
    estimate_constant,
    uniformity_test,
)
from dualvol.characterize.recovery import RecoveredMeasure, recover_measure, recovery_size
from dualvol.config import (
    CONSTANT_SPREAD_TOLERANCE,
    DEFAULT_RECOVERY_BUDGET,
    DEFAULT_TOLERANCE,
    DEFAULT_TRIALS,
    MIN_VALIDATION_TRIALS,
)
from dualvol.core.sphere import SphereGrid
from dualvol.errors import BudgetError, InvalidParameterError, RequiresGridError
from dualvol.functionals.base import Functional
from dualvol.functionals.checks import (
    PropertyReport,
    Verdict,
    check_additive,
    check_increasing,
    check_positive,
    check_rotation_invariant,
    check_vanishing,
)
from dualvol.utils.logging import get_logger

logger = get_logger("dmv.characterize")

STAGES = ("kernel", "diagonal", "constant")


class Conclusion(str, Enum):
    GENERAL_KERNEL = "general-kernel"
    DIAGONAL_MEASURE = "diagonal-measure"
    C_TIMES_DMV = "c-times-dmv"
    HYPOTHESIS_VIOLATED = "hypothesis-violated"


@dataclass
class CharacterizationReport:
    functional: Dict
    grid: str
    trials: int
    seed: int
    tolerance: float
    real_valued: bool = False
    up_to: str = "constant"
    properties: Dict[str, PropertyReport] = field(default_factory=dict)
    recovered: Optional[RecoveredMeasure] = None
    diagonality: Optional[DiagonalityResult] = None
    uniformity: Optional[UniformityResult] = None
    constant: Optional[ConstantEstimate] = None
    conclusion: Optional[Conclusion] = None
    culprit: Optional[str] = None

    @property
    def all_checks_passed(self) -> bool:
        if self.conclusion == Conclusion.HYPOTHESIS_VIOLATED:
            return False
        return not any(report.failed for report in self.properties.values())

    def ratio_series(self) -> List[Tuple[int, float, float, float]]:
        return list(self.constant.series) if self.constant is not None else []

    def to_dict(self) -> Dict:
        return {
            "functional": self.functional,
            "grid": self.grid,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "real_valued": self.real_valued,
            "up_to": self.up_to,
            "properties": {name: report.to_dict() for name, report in self.properties.items()},
            "recovered": self.recovered.to_dict() if self.recovered else None,
            "diagonality": self.diagonality.to_dict() if self.diagonality else None,
            "uniformity": self.uniformity.to_dict() if self.uniformity else None,
            "constant": self.constant.to_dict() if self.constant else None,
            "conclusion": self.conclusion.value if self.conclusion else None,
            "culprit": self.culprit,
        }


def _finish(report: CharacterizationReport, conclusion: Conclusion, culprit: Optional[str] = None):
    report.conclusion = conclusion
    report.culprit = culprit
    logger.info(f"Conclusion for {report.functional['name']}: {conclusion.value}"
                + (f" (culprit: {culprit})" if culprit else ""))
    return report


def characterize(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    tol: float = DEFAULT_TOLERANCE,
    real_valued: bool = False,
    up_to: str = "constant",
    budget: int = DEFAULT_RECOVERY_BUDGET,
    workers: int = 1
) -> CharacterizationReport:
    """Run the hypothesis checks and derive the strongest supported representation.

    Args:
        functional: Functional evaluable on grid polycones
        grid: Grid for inputs and recovery (defaults to the functional's)
        trials: Random trials per check
        seed: Seed for every random stage
        tol: Relative tolerance
        real_valued: Check monotonicity instead of positivity
        up_to: Last stage to attempt: ``kernel``, ``diagonal`` or ``constant``
        budget: Maximum evaluations for measure recovery
        workers: Threads for measure recovery

    Returns:
        Report whose conclusion is ``hypothesis-violated`` (with the culprit) as soon
        as a required hypothesis fails; completed checks are kept.

    Raises:
        BudgetError: If full recovery exceeds the budget and the vanishing check did not pass
    """
    if up_to not in STAGES:
        raise InvalidParameterError(f"up_to must be one of {', '.join(STAGES)}, got {up_to!r}")
    grid = grid or functional.grid
    if grid is None:
        raise RequiresGridError(f"characterizing {functional.name} needs a grid")
    stage = STAGES.index(up_to)
    report = CharacterizationReport(
        functional=functional.describe(), grid=grid.grid_id, trials=trials, seed=seed,
        tolerance=tol, real_valued=real_valued, up_to=up_to,
    )

    def run(check, name: str) -> PropertyReport:
        result = check(functional, grid, trials=trials, seed=seed, tol=tol)
        report.properties[name] = result
        return result

    if run(check_additive, "additive").failed:
        return _finish(report, Conclusion.HYPOTHESIS_VIOLATED, "additive")
    if real_valued:
        order_check, order_name = check_increasing, "increasing"
    else:
        order_check, order_name = check_positive, "positive"
    if run(order_check, order_name).failed:
        return _finish(report, Conclusion.HYPOTHESIS_VIOLATED, order_name)

    vanishing = run(check_vanishing, "vanishing") if stage >= 1 else None

    full_size = recovery_size(grid)
    if full_size <= budget:
        diagonal_only = False
    elif vanishing is not None and vanishing.passed:
        diagonal_only = True
    else:
        raise BudgetError(
            f"full recovery on {grid.grid_id} needs {full_size} evaluations, "
            f"over the budget of {budget}; "
            "diagonal-only recovery needs a passed vanishing check"
        )
    report.recovered = recover_measure(
        functional, grid, budget=budget, diagonal_only=diagonal_only,
        validation_trials=max(trials, MIN_VALIDATION_TRIALS), seed=seed, workers=workers,
    )
    recovered_kernel = report.recovered.kernel
    if recovered_kernel.negative_mass > tol * max(1.0, recovered_kernel.variation):
        report.properties[order_name].verdict = Verdict.FAIL
        report.properties[order_name].note = (
            f"recovered measure has negative mass {recovered_kernel.negative_mass:.6g}"
        )
        return _finish(report, Conclusion.HYPOTHESIS_VIOLATED, order_name)

    if vanishing is None:
        return _finish(report, Conclusion.GENERAL_KERNEL)
    if vanishing.failed:
        return _finish(report, Conclusion.HYPOTHESIS_VIOLATED, "vanishing")

    report.diagonality = diagonality_test(report.recovered, tol)
    if report.diagonality.verdict == Verdict.FAIL:
        vanishing.verdict = Verdict.FAIL
        vanishing.note = "recovered measure carries off-diagonal mass"
        return _finish(report, Conclusion.HYPOTHESIS_VIOLATED, "vanishing")
    if stage == 1:
        return _finish(report, Conclusion.DIAGONAL_MEASURE)

    rotation = run(check_rotation_invariant, "rotation")
    if rotation.verdict != Verdict.PASS:
        return _finish(report, Conclusion.DIAGONAL_MEASURE, "rotation" if rotation.failed else None)

    report.uniformity = uniformity_test(report.diagonality.projected, tol)
    report.constant = estimate_constant(functional, grid, trials=max(trials, 2), seed=seed, tol=tol)
    spread_tol = min(tol, CONSTANT_SPREAD_TOLERANCE)
    if report.uniformity.verdict == Verdict.PASS and report.constant.spread <= spread_tol:
        return _finish(report, Conclusion.C_TIMES_DMV)
    return _finish(report, Conclusion.DIAGONAL_MEASURE, "uniformity")
