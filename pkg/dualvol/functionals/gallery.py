"""Counterexample functionals.

Each one keeps all but one hypothesis of the characterization:

* ``intersection-volume``: ``H^n(L₁ ∩ ⋯ ∩ Lₙ)``, not additive.
* ``product-of-integrals``: ``Π_i ∫ ρ_i du``, does not vanish on disjoint arguments.
* ``weighted-by-m``: ``∫ ρ₁⋯ρₙ ρ_M du`` for a star body M that is not a centred ball,
  not rotation invariant. The default M is a two-level polycone, so the integral is
  exact on grids.
"""
import math
from typing import List, Optional

import numpy as np

from dualvol.core.sphere import Arc, Cap, CellSet, Direction, FullSphere, SphereGrid
from dualvol.core.starset import GridRadial, SimpleRadial, StarSet, canonicalize
from dualvol.engines.exact import tabulate
from dualvol.errors import DimensionError, InvalidParameterError, RequiresGridError
from dualvol.functionals.implementations import BlackBoxFunctional

# property each counterexample is built to violate
DESIGNATED_FAILURES = {
    "intersection-volume": "additive",
    "product-of-integrals": "vanishing",
    "weighted-by-m": "rotation",
}

# level of the default weight body on its raised half
WEIGHT_PEAK = 1.5


def intersection_volume(dim: int, grid: Optional[SphereGrid] = None) -> BlackBoxFunctional:
    """``H^n(∩ L_i) = (1/n) ∫ min_i ρ_i^n du``."""

    def evaluator(bodies: List[StarSet]) -> float:
        table = tabulate(bodies, grid)
        meet = np.min(table.values, axis=0)
        return math.fsum((table.weights * meet ** dim).tolist()) / dim

    return BlackBoxFunctional(
        "intersection-volume", dim, evaluator, grid,
        description="volume of the intersection of the arguments",
    )


def product_of_integrals(dim: int, grid: Optional[SphereGrid] = None) -> BlackBoxFunctional:
    """``Π_i ∫ ρ_i du``."""

    def evaluator(bodies: List[StarSet]) -> float:
        table = tabulate(bodies, grid)
        return math.prod(math.fsum((table.weights * row).tolist()) for row in table.values)

    return BlackBoxFunctional(
        "product-of-integrals", dim, evaluator, grid,
        description="product of the integrals of the radial functions",
    )


def half_region(dim: int, grid: Optional[SphereGrid] = None):
    """Half of the sphere on which the default weight body is raised.

    On a grid it is the cells whose azimuth lies in ``[0, π)``; in the plane without
    a grid the arc ``[0, π)``; otherwise the hemisphere around the first axis.
    """
    if grid is not None:
        if grid.dim == 2:
            cells = range(grid.size // 2)
        else:
            bands, sectors = grid.shape
            cells = [b * sectors + s for b in range(bands) for s in range(sectors // 2)]
        return CellSet(grid.grid_id, frozenset(cells))
    if dim == 2:
        return Arc(0.0, math.pi)
    return Cap(Direction((1.0,) + (0.0,) * (dim - 1)), math.pi / 2)


def default_weight_body(dim: int, grid: Optional[SphereGrid] = None) -> StarSet:
    """Polycone with ``ρ_M = 3/2`` on :func:`half_region` and ``1`` elsewhere.

    Aligned with ``grid`` when one is given, so the weighted integral stays exact.
    """
    if grid is not None and grid.dim != dim:
        raise DimensionError(f"grid {grid.grid_id} for a weight body of dimension {dim}")
    terms = [(1.0, FullSphere(dim)), (WEIGHT_PEAK, half_region(dim, grid))]
    try:
        return canonicalize(terms, dim, grid)
    except RequiresGridError:
        return StarSet(dim, SimpleRadial(dim, tuple(terms)))


def _axis_points(dim: int) -> np.ndarray:
    points = []
    for axis in range(dim):
        for sign in (1.0, -1.0):
            point = np.zeros(dim)
            point[axis] = sign
            points.append(point)
    diagonal = np.ones(dim) / math.sqrt(dim)
    points.extend([diagonal, -diagonal])
    return np.array(points)


def is_centered_ball(body: StarSet, grid: Optional[SphereGrid] = None) -> bool:
    """Whether ``ρ_M`` is constant, as far as its representation or a few directions show."""
    rho = body.rho
    if isinstance(rho, (SimpleRadial, GridRadial)):
        return rho.is_continuous
    points = grid.representatives if grid is not None else _axis_points(body.dim)
    values = rho.evaluate_many(points)
    return bool(np.ptp(values) <= 1e-12 * max(1.0, float(np.max(np.abs(values)))))


def weighted_by_m(
    dim: int,
    grid: Optional[SphereGrid] = None,
    weight_body: Optional[StarSet] = None
) -> BlackBoxFunctional:
    """``∫ ρ₁⋯ρₙ ρ_M du``.

    Raises:
        InvalidParameterError: If ``M`` is a centred ball, which would make the functional
            rotation invariant
    """
    if weight_body is None:
        weight_body = default_weight_body(dim, grid)
    if weight_body.dim != dim:
        raise DimensionError(
            f"weight body of dimension {weight_body.dim} for a functional of dimension {dim}"
        )
    if is_centered_ball(weight_body, grid):
        raise InvalidParameterError(
            "weighted-by-m needs a star body M that is not a ball centred at the origin"
        )

    def evaluator(bodies: List[StarSet]) -> float:
        return tabulate(list(bodies) + [weight_body], grid).product_integral()

    return BlackBoxFunctional(
        "weighted-by-m", dim, evaluator, grid,
        description="integral of the product of radial functions weighted by a fixed body",
    )
