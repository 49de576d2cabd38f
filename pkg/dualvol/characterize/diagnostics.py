"""Diagonality and uniformity of recovered measures, and the constant ``c`` in ``F = c·Ṽ``."""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from dualvol.characterize.recovery import RecoveredMeasure
from dualvol.config import DEFAULT_TOLERANCE, DEFAULT_TRIALS
from dualvol.core.mixed_volume import dual_mixed_volume
from dualvol.core.sphere import SphereGrid, grid_symmetries
from dualvol.errors import DegenerateSampleError, InvalidParameterError, RequiresGridError
from dualvol.functionals.base import Functional
from dualvol.functionals.checks import Verdict
from dualvol.functionals.implementations import DiagonalFunctional, KernelFunctional
from dualvol.functionals.sampling import random_tuple
from dualvol.utils.logging import get_logger

logger = get_logger("dmv.characterize")


@dataclass
class DiagonalityResult:
    verdict: Verdict
    off_diagonal_mass: float
    total_mass: float
    largest_off_diagonal: Optional[Tuple[Tuple[int, ...], float]] = None
    projected: Optional[DiagonalFunctional] = None

    def to_dict(self) -> Dict:
        largest = None
        if self.largest_off_diagonal is not None:
            index, value = self.largest_off_diagonal
            largest = {"idx": list(index), "w": value}
        return {
            "verdict": self.verdict.value,
            "off_diagonal_mass": self.off_diagonal_mass,
            "total_mass": self.total_mass,
            "largest_off_diagonal": largest,
            "projected_weights": (
                self.projected.weights.tolist() if self.projected is not None else None
            ),
        }


def diagonality_test(
    measure: Union[RecoveredMeasure, KernelFunctional],
    tol: float = DEFAULT_TOLERANCE
) -> DiagonalityResult:
    """Pass iff the mass off ``{(k,…,k)}`` is at most ``tol`` times the total.

    On a pass the diagonal part is returned as a ``DiagonalFunctional``.
    """
    kernel = measure.kernel if isinstance(measure, RecoveredMeasure) else measure
    off_diagonal = np.array([len(set(index)) > 1 for index in kernel.indices.tolist()], dtype=bool)
    magnitudes = np.abs(kernel.values)
    off_mass = math.fsum(magnitudes[off_diagonal].tolist())
    total = kernel.variation
    largest = None
    if np.any(off_diagonal):
        position = int(np.flatnonzero(off_diagonal)[np.argmax(magnitudes[off_diagonal])])
        largest = (tuple(int(k) for k in kernel.indices[position]), float(kernel.values[position]))
    if off_mass > tol * total:
        return DiagonalityResult(Verdict.FAIL, off_mass, total, largest)

    weights = np.zeros(kernel.grid.size)
    for index, value in zip(kernel.indices.tolist(), kernel.values.tolist()):
        if len(set(index)) == 1:
            weights[index[0]] = value
    projected = DiagonalFunctional(
        kernel.grid, weights, allow_signed=True, name=f"diag({kernel.name})"
    )
    return DiagonalityResult(Verdict.PASS, off_mass, total, largest, projected)


@dataclass
class UniformityResult:
    verdict: Verdict
    density: List[float] = field(default_factory=list)
    lam: float = 0.0
    spread: float = 0.0
    worst_cell: Optional[int] = None
    note: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            "verdict": self.verdict.value,
            "lambda": self.lam,
            "spread": self.spread,
            "worst_cell": self.worst_cell,
            "density": self.density,
            "note": self.note,
        }


def uniformity_test(
    diagonal: DiagonalFunctional, tol: float = DEFAULT_TOLERANCE
) -> UniformityResult:
    """Pass iff the density ``w_k / σ(A_k)`` is constant: ``max - min ≤ tol·|mean|``.

    A grid with only the identity symmetry gives an inconclusive result.
    """
    density = diagonal.density
    lam = math.fsum(density.tolist()) / len(density)
    spread = float(np.max(density) - np.min(density))
    worst = int(np.argmax(np.abs(density - lam)))
    result = UniformityResult(Verdict.PASS, density.tolist(), lam, spread, worst)
    if len(grid_symmetries(diagonal.grid)) <= 1:
        result.verdict = Verdict.INCONCLUSIVE
        result.note = f"grid {diagonal.grid.grid_id} has no nontrivial symmetries"
    elif spread > tol * abs(lam):
        result.verdict = Verdict.FAIL
    return result


@dataclass
class ConstantEstimate:
    """Ratios ``F/Ṽ`` over random tuples.

    ``series`` holds ``(trial, F, Ṽ, ratio)`` rows for the usable tuples.
    """
    c: float
    spread: float
    usable: int
    series: List[Tuple[int, float, float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {"c": self.c, "spread": self.spread, "usable": self.usable}


def estimate_constant(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    tol: float = DEFAULT_TOLERANCE
) -> ConstantEstimate:
    """Mean of ``F/Ṽ`` over random tuples with ``Ṽ > 0``, and the relative spread
    ``(max - min)/|mean|``.

    Raises:
        InvalidParameterError: If ``trials < 2``
        DegenerateSampleError: If every sampled tuple has ``Ṽ = 0``
    """
    if trials < 2:
        raise InvalidParameterError(f"estimating a constant needs at least 2 trials, got {trials}")
    grid = grid or functional.grid
    if grid is None:
        raise RequiresGridError(f"estimating the constant of {functional.name} needs a grid")
    rng = np.random.default_rng(seed)
    series = []
    for trial in range(trials):
        bodies = random_tuple(grid, rng, dense=trial % 2 == 0)
        reference = dual_mixed_volume(bodies, grid=grid).value
        if reference <= 0.0:
            continue
        value = functional.evaluate(bodies)
        series.append((trial, value, reference, value / reference))
    if not series:
        raise DegenerateSampleError(f"all {trials} sampled tuples have zero dual mixed volume")

    ratios = [row[3] for row in series]
    c = math.fsum(ratios) / len(ratios)
    low, high = min(ratios), max(ratios)
    if high == low:
        spread = 0.0
    elif c != 0.0:
        spread = (high - low) / abs(c)
    else:
        spread = math.inf
    if -tol <= c < 0.0:
        c = 0.0
    logger.info(f"Estimated c = {c:.12g} over {len(series)} tuples (spread {spread:.3g})")
    return ConstantEstimate(c, spread, len(series), series)
