"""Randomized property checkers for functionals on grid polycones.

Every checker draws its inputs from ``np.random.default_rng(seed)``, alternating
sparse and dense tuples, and compares residuals against ``tol`` times
``max(1, |values involved|)``. Violations are reported, never raised.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from dualvol.config import DEFAULT_TOLERANCE, DEFAULT_TRIALS
from dualvol.core.sphere import SphereGrid, grid_symmetries
from dualvol.core.starset import StarSet, ball, radial_sum, rotate_starset, scale
from dualvol.errors import InvalidParameterError, RequiresGridError
from dualvol.functionals.base import Functional
from dualvol.functionals.sampling import disjoint_pair, random_level, random_polycone, random_tuple
from dualvol.utils.logging import get_logger

HOMOGENEITY_FACTORS = (0.0, 1.0 / 3.0, 1.0, 2.0, 3.5, math.e)

logger = get_logger("dmv.checks")


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass
class PropertyReport:
    """Outcome of one property check.

    A failed report carries the first violating trial in ``witness`` and the
    descriptors of the star sets involved in ``witness_inputs``.
    """
    name: str
    verdict: Verdict
    trials: int = 0
    max_residual: float = 0.0
    tolerance: float = DEFAULT_TOLERANCE
    witness: Optional[Dict[str, Any]] = None
    witness_inputs: List[Dict[str, Any]] = field(default_factory=list)
    note: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.verdict == Verdict.PASS

    @property
    def failed(self) -> bool:
        return self.verdict == Verdict.FAIL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "verdict": self.verdict.value,
            "trials": self.trials,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "witness": self.witness,
            "witness_inputs": self.witness_inputs,
            "note": self.note,
        }


class _Tracker:
    """Collects residuals and keeps the first violation."""

    def __init__(self, name: str, trials: int, tol: float):
        self.report = PropertyReport(name, Verdict.PASS, trials=trials, tolerance=tol)

    def record(self, residual: float, witness: Dict[str, Any], inputs: Sequence[Sequence[StarSet]]):
        report = self.report
        if not math.isfinite(residual) or residual > report.max_residual:
            report.max_residual = residual
        if report.verdict == Verdict.PASS and not residual <= report.tolerance:
            report.verdict = Verdict.FAIL
            report.witness = witness
            report.witness_inputs = [
                {"tuple": [body.to_descriptor() for body in bodies]} for bodies in inputs
            ]
            logger.info(f"{report.name} violated: residual {residual:.3g} > {report.tolerance:.3g}")

    def done(self) -> PropertyReport:
        report = self.report
        logger.debug(
            f"{report.name}: {report.verdict.value}, max residual {report.max_residual:.3g}"
        )
        return self.report


def _scale(*values: float) -> float:
    return max([1.0] + [abs(v) for v in values])


def _grid_for(functional: Functional, grid: Optional[SphereGrid]) -> SphereGrid:
    grid = grid or functional.grid
    if grid is None:
        raise RequiresGridError(f"checking {functional.name} needs a grid")
    return grid


def _check_trials(trials: int):
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")


def _replace(bodies: Sequence[StarSet], slot: int, body: StarSet) -> List[StarSet]:
    out = list(bodies)
    out[slot] = body
    return out


def check_additive(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    tol: float = DEFAULT_TOLERANCE
) -> PropertyReport:
    """``F(…, L_i +̃ M_i, …) = F(…, L_i, …) + F(…, M_i, …)`` in every slot."""
    _check_trials(trials)
    grid = _grid_for(functional, grid)
    rng = np.random.default_rng(seed)
    tracker = _Tracker("additive", trials, tol)
    for trial in range(trials):
        bodies = random_tuple(grid, rng, dense=trial % 2 == 1)
        base = functional.evaluate(bodies)
        for slot in range(grid.dim):
            extra = random_polycone(grid, rng)
            summed = _replace(bodies, slot, radial_sum(bodies[slot], extra))
            other = _replace(bodies, slot, extra)
            lhs = functional.evaluate(summed)
            part = functional.evaluate(other)
            residual = abs(lhs - base - part) / _scale(lhs, base, part)
            tracker.record(residual, {"trial": trial, "slot": slot, "lhs": lhs, "rhs": base + part},
                           [summed, bodies, other])
    return tracker.done()


def check_positive(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    tol: float = DEFAULT_TOLERANCE
) -> PropertyReport:
    """``F ≥ 0`` on nonnegative tuples."""
    _check_trials(trials)
    grid = _grid_for(functional, grid)
    rng = np.random.default_rng(seed)
    tracker = _Tracker("positive", trials, tol)
    for trial in range(trials):
        bodies = random_tuple(grid, rng, dense=trial % 2 == 0)
        value = functional.evaluate(bodies)
        tracker.record(max(0.0, -value) / _scale(value), {"trial": trial, "value": value}, [bodies])
    return tracker.done()


def check_increasing(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    tol: float = DEFAULT_TOLERANCE
) -> PropertyReport:
    """``ρ_{L_i} ≤ ρ_{M_i}`` for all i implies ``F(L) ≤ F(M)``."""
    _check_trials(trials)
    grid = _grid_for(functional, grid)
    rng = np.random.default_rng(seed)
    tracker = _Tracker("increasing", trials, tol)
    for trial in range(trials):
        smaller = random_tuple(grid, rng, dense=trial % 2 == 1)
        larger = [
            radial_sum(body, random_polycone(grid, rng), ball(grid.dim, random_level(rng)))
            for body in smaller
        ]
        low = functional.evaluate(smaller)
        high = functional.evaluate(larger)
        residual = max(0.0, low - high) / _scale(low, high)
        witness = {"trial": trial, "smaller": low, "larger": high}
        tracker.record(residual, witness, [smaller, larger])
    return tracker.done()


def check_homogeneous(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    tol: float = DEFAULT_TOLERANCE
) -> PropertyReport:
    """``F(…, t L_i, …) = t F(…, L_i, …)`` for several ``t ≥ 0``."""
    _check_trials(trials)
    grid = _grid_for(functional, grid)
    rng = np.random.default_rng(seed)
    tracker = _Tracker("homogeneous", trials, tol)
    for trial in range(trials):
        bodies = random_tuple(grid, rng, dense=trial % 2 == 1)
        base = functional.evaluate(bodies)
        for slot in range(grid.dim):
            for t in HOMOGENEITY_FACTORS:
                scaled = _replace(bodies, slot, scale(t, bodies[slot]))
                value = functional.evaluate(scaled)
                residual = abs(value - t * base) / _scale(value, t * base)
                witness = {"trial": trial, "slot": slot, "t": t, "lhs": value, "rhs": t * base}
                tracker.record(residual, witness, [scaled, bodies])
    return tracker.done()


def check_vanishing(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    tol: float = DEFAULT_TOLERANCE
) -> PropertyReport:
    """``F = 0`` whenever two arguments meet only in the origin."""
    _check_trials(trials)
    grid = _grid_for(functional, grid)
    rng = np.random.default_rng(seed)
    tracker = _Tracker("vanishing", trials, tol)
    for trial in range(trials):
        bodies = random_tuple(grid, rng, dense=trial % 2 == 1)
        reference = functional.evaluate(bodies)
        i, j = (int(s) for s in rng.choice(grid.dim, size=2, replace=False))
        first, second = disjoint_pair(grid, rng)
        separated = _replace(_replace(bodies, i, first), j, second)
        value = functional.evaluate(separated)
        witness = {"trial": trial, "slots": [i, j], "value": value}
        tracker.record(abs(value) / _scale(reference), witness, [separated])
    return tracker.done()


def check_rotation_invariant(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    tol: float = DEFAULT_TOLERANCE
) -> PropertyReport:
    """``F(φL₁,…,φLₙ) = F(L₁,…,Lₙ)`` for the symmetries of the grid.

    Symmetries are visited round-robin, so every one is used once ``trials`` reaches
    the group order. A grid without nontrivial symmetries gives an inconclusive report.
    """
    _check_trials(trials)
    grid = _grid_for(functional, grid)
    symmetries = [s for s in grid_symmetries(grid) if not s.is_identity]
    if not symmetries:
        return PropertyReport("rotation", Verdict.INCONCLUSIVE, trials=0, tolerance=tol,
                              note=f"grid {grid.grid_id} has no nontrivial symmetries")
    rng = np.random.default_rng(seed)
    tracker = _Tracker("rotation", trials, tol)
    for trial in range(trials):
        symmetry = symmetries[trial % len(symmetries)]
        bodies = random_tuple(grid, rng, dense=trial % 2 == 1)
        rotated = [rotate_starset(symmetry.rotation, body) for body in bodies]
        before = functional.evaluate(bodies)
        after = functional.evaluate(rotated)
        residual = abs(after - before) / _scale(before, after)
        angle = symmetry.rotation.planar_angle
        tracker.record(residual, {"trial": trial, "angle": angle, "before": before, "after": after},
                       [bodies, rotated])
    return tracker.done()


CHECKS = {
    "additive": check_additive,
    "positive": check_positive,
    "increasing": check_increasing,
    "homogeneous": check_homogeneous,
    "vanishing": check_vanishing,
    "rotation": check_rotation_invariant,
}
