"""Recover the representing measure of a functional from evaluations on indicator cones."""
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from dualvol.config import DEFAULT_RECOVERY_BUDGET
from dualvol.core.sphere import SphereGrid
from dualvol.core.starset import Polycone, star_hull
from dualvol.errors import BudgetError, InvalidParameterError, RequiresGridError
from dualvol.functionals.base import Functional
from dualvol.functionals.implementations import KernelFunctional
from dualvol.functionals.sampling import random_tuple
from dualvol.utils.logging import get_logger

logger = get_logger("dmv.recovery")


@dataclass
class RecoveredMeasure:
    """Kernel read off a functional, with its validation residual.

    Attributes:
        kernel: Recovered weights (signed, so that negative mass stays visible)
        residual: Largest relative reconstruction error over the validation tuples
        validation_trials: Number of validation tuples
        diagonal_only: Whether only diagonal multi-indices were evaluated
        evaluations: Number of functional evaluations spent on the weights
    """
    kernel: KernelFunctional
    residual: float
    validation_trials: int
    diagonal_only: bool
    evaluations: int

    @property
    def negative_mass(self) -> float:
        return self.kernel.negative_mass

    def to_dict(self) -> Dict:
        return {
            "grid": self.kernel.grid.grid_id,
            "diagonal_only": self.diagonal_only,
            "evaluations": self.evaluations,
            "total_mass": self.kernel.total_mass,
            "negative_mass": self.negative_mass,
            "residual": self.residual,
            "validation_trials": self.validation_trials,
            "entries": self.kernel.to_descriptor()["entries"],
        }


def indicator_cones(grid: SphereGrid) -> List[Polycone]:
    """``st A_k`` for every cell ``A_k``."""
    return [star_hull(grid.cell_region(k)) for k in range(grid.size)]


def recovery_size(grid: SphereGrid, diagonal_only: bool = False) -> int:
    return grid.size if diagonal_only else grid.size ** grid.dim


def recover_measure(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    budget: int = DEFAULT_RECOVERY_BUDGET,
    diagonal_only: bool = False,
    validation_trials: int = 100,
    seed: int = 0,
    workers: int = 1
) -> RecoveredMeasure:
    """Weights ``μ[k₁,…,kₙ] = F(st A_{k₁},…,st A_{kₙ})`` over cell multi-indices.

    Args:
        functional: Functional evaluable on grid-aligned polycones
        grid: Grid whose cells index the weights (defaults to the functional's)
        budget: Maximum number of evaluations
        diagonal_only: Evaluate only ``(k,…,k)``, valid once the functional vanishes on
            disjoint arguments
        validation_trials: Random tuples on which the recovered kernel is compared with ``F``
        seed: Seed for the validation tuples
        workers: Threads for the evaluations (ignored for serial functionals)

    Raises:
        BudgetError: If the enumeration exceeds ``budget``
    """
    grid = grid or functional.grid
    if grid is None:
        raise RequiresGridError(f"recovering {functional.name} needs a grid")
    if validation_trials < 0:
        raise InvalidParameterError(f"validation_trials must be >= 0, got {validation_trials}")
    count = recovery_size(grid, diagonal_only)
    if count > budget:
        raise BudgetError(
            f"recovery on {grid.grid_id} needs {count} evaluations, over the budget of {budget}"
        )

    cones = indicator_cones(grid)
    if diagonal_only:
        indices: List[Tuple[int, ...]] = [(k,) * grid.dim for k in range(grid.size)]
    else:
        indices = list(itertools.product(range(grid.size), repeat=grid.dim))

    def weight(index: Tuple[int, ...]) -> float:
        return functional.evaluate([cones[k] for k in index])

    logger.info(
        f"Recovering {functional.name} on {grid.grid_id}: {count} evaluations, {workers} worker(s)"
    )
    if workers > 1 and not functional.serial:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(weight, indices))
    else:
        values = [weight(index) for index in indices]

    kernel = KernelFunctional(
        grid,
        {index: value for index, value in zip(indices, values) if value != 0.0},
        allow_signed=True,
        name=f"recovered({functional.name})",
    )

    rng = np.random.default_rng(seed)
    residual = 0.0
    for trial in range(validation_trials):
        bodies = random_tuple(grid, rng, dense=trial % 2 == 1)
        expected = functional.evaluate(bodies)
        got = kernel.evaluate(bodies)
        residual = max(residual, abs(got - expected) / max(1.0, abs(expected)))
    logger.info(
        f"Recovered {len(kernel.values)} nonzero weights, validation residual {residual:.3g}"
    )
    return RecoveredMeasure(kernel, residual, validation_trials, diagonal_only, count)
