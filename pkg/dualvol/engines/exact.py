"""Exact engine: tabulate radial functions on common atoms and integrate products."""
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from dualvol.core.sphere import SphereGrid
from dualvol.core.starset import (
    GridRadial,
    SamplerRadial,
    StarSet,
    grid_values,
    tabulate_simple,
)
from dualvol.errors import GridMismatchError, RequiresGridError

EXACT = "exact"
QUADRATURE = "quadrature"


@dataclass(frozen=True)
class Tabulation:
    """Radial values of several bodies on shared atoms.

    Attributes:
        weights: Exact measure of each atom
        values: ``values[b, a]`` is ``ρ_b`` on atom ``a``
        method: ``exact`` or ``quadrature`` (samplers read at cell representatives)
    """
    weights: np.ndarray
    values: np.ndarray
    method: str

    def product_integral(self, rows: Optional[Sequence[int]] = None) -> float:
        """``∫ Π_{b in rows} ρ_b du`` with compensated summation."""
        rows = range(len(self.values)) if rows is None else rows
        integrand = np.array(self.weights, dtype=float)
        for b in rows:
            integrand = integrand * self.values[b]
        return math.fsum(integrand.tolist())


def tabulate(bodies: Sequence[StarSet], grid: Optional[SphereGrid] = None) -> Tabulation:
    """Tabulate bodies of one dimension on a common refinement or a grid.

    Raises:
        RequiresGridError: If a sampler is involved without a grid, or regions cannot be
            refined exactly
        GridMismatchError: If grid-sampled bodies live on different grids
    """
    dim = bodies[0].dim
    has_sampler = any(isinstance(b.rho, SamplerRadial) for b in bodies)
    grids = {b.rho.grid for b in bodies if isinstance(b.rho, GridRadial)}
    if grid is not None:
        grids.add(grid)
    if len(grids) > 1:
        raise GridMismatchError(f"bodies on different grids: {sorted(g.grid_id for g in grids)}")

    if grids:
        shared = grids.pop()
        values = np.vstack([grid_values(b, shared) for b in bodies])
        return Tabulation(np.asarray(shared.weights), values, QUADRATURE if has_sampler else EXACT)
    if has_sampler:
        raise RequiresGridError(
            "sampler bodies need a grid for quadrature; use the Monte Carlo engine instead"
        )
    refinement, values = tabulate_simple(bodies, dim)
    return Tabulation(refinement.measures, values, EXACT)
