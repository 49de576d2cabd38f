"""Random grid-aligned inputs for the property checkers.

Sparse polycones cover 1 to 4 cells with levels log-uniform in [1/4, 4]. Dense
polycones add a positive level on the whole sphere, so that products of radial
functions do not vanish.
"""
import math
from typing import FrozenSet, List, Tuple

import numpy as np

from dualvol.core.sphere import CellSet, FullSphere, SphereGrid
from dualvol.core.starset import Polycone, canonicalize
from dualvol.errors import DomainError

MIN_LEVEL = 0.25
MAX_LEVEL = 4.0
MAX_CELLS = 4


def random_level(rng: np.random.Generator) -> float:
    return float(math.exp(rng.uniform(math.log(MIN_LEVEL), math.log(MAX_LEVEL))))


def random_polycone(
    grid: SphereGrid, rng: np.random.Generator, max_cells: int = MAX_CELLS
) -> Polycone:
    """Polycone over 1 to ``max_cells`` random cells, one random level per cell."""
    count = int(rng.integers(1, min(max_cells, grid.size) + 1))
    cells = rng.choice(grid.size, size=count, replace=False)
    terms = [(random_level(rng), CellSet(grid.grid_id, frozenset({int(k)}))) for k in cells]
    return canonicalize(terms, grid.dim, grid)


def random_dense_polycone(grid: SphereGrid, rng: np.random.Generator) -> Polycone:
    """Random polycone plus a positive level on every cell."""
    background = random_level(rng)
    count = int(rng.integers(1, min(MAX_CELLS, grid.size) + 1))
    cells = rng.choice(grid.size, size=count, replace=False)
    terms = [(background, FullSphere(grid.dim))]
    terms += [
        (background + random_level(rng), CellSet(grid.grid_id, frozenset({int(k)})))
        for k in cells
    ]
    return canonicalize(terms, grid.dim, grid)


def random_tuple(grid: SphereGrid, rng: np.random.Generator, dense: bool = False) -> List[Polycone]:
    """n random polycones on ``grid``."""
    make = random_dense_polycone if dense else random_polycone
    return [make(grid, rng) for _ in range(grid.dim)]


def random_cell_set(grid: SphereGrid, rng: np.random.Generator, p: float = 0.5) -> CellSet:
    """Each cell kept independently with probability ``p``."""
    keep = rng.random(grid.size) < p
    return CellSet(grid.grid_id, frozenset(int(k) for k in np.nonzero(keep)[0]))


def disjoint_cell_sets(
    grid: SphereGrid, rng: np.random.Generator
) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    """Two nonempty disjoint cell sets; every cell lands in the first, the second or neither."""
    if grid.size < 2:
        raise DomainError(f"grid {grid.grid_id} has fewer than two cells")
    while True:
        labels = rng.integers(0, 3, size=grid.size)
        first = frozenset(int(k) for k in np.nonzero(labels == 0)[0])
        second = frozenset(int(k) for k in np.nonzero(labels == 1)[0])
        if first and second:
            return first, second


def disjoint_pair(grid: SphereGrid, rng: np.random.Generator) -> Tuple[Polycone, Polycone]:
    """Two polycones whose bases are disjoint, so they intersect only in the origin."""
    first, second = disjoint_cell_sets(grid, rng)

    def build(cells: FrozenSet[int]) -> Polycone:
        terms = [(random_level(rng), CellSet(grid.grid_id, frozenset({k}))) for k in sorted(cells)]
        return canonicalize(terms, grid.dim, grid)

    return build(first), build(second)


def random_signed_function(
    grid: SphereGrid, rng: np.random.Generator, bound: float = 2.0
) -> np.ndarray:
    """Signed grid function with values uniform in ``[-bound, bound]``."""
    return rng.uniform(-bound, bound, size=grid.size)


def random_kernel_weights(
    grid: SphereGrid,
    rng: np.random.Generator,
    entries: int = 8,
    low: float = 0.1,
    high: float = 5.0
):
    """Sparse nonnegative weights on random cell multi-indices."""
    weights = {}
    entries = min(entries, grid.size ** grid.dim)
    while len(weights) < entries:
        index = tuple(int(k) for k in rng.integers(0, grid.size, size=grid.dim))
        weights[index] = float(rng.uniform(low, high))
    return weights
