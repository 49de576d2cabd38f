"""Common refinements of spherical regions.

A refinement splits the sphere into atoms such that every input region is a union
of atoms. Exact refinements exist for arcs in n = 2 (interval overlay), for regions
aligned with one shared grid (cell alignment), and for the trivial cases of the
full sphere or a single repeated region.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from dualvol.core.sphere import (
    TWO_PI,
    CellSet,
    FullSphere,
    SphereGrid,
    SphericalRegion,
    arc_intervals,
    arc_region,
    rasterize,
    region_measure,
    surface_measure,
)
from dualvol.errors import DimensionError, GridMismatchError, RequiresGridError

FULL = "full"
SPLIT = "split"
INTERVAL = "interval"
CELL = "cell"


@dataclass(frozen=True, eq=False)
class Refinement:
    """Atoms of a common refinement.

    Attributes:
        dim: Ambient dimension
        mode: How the atoms were built (full, split, interval or cell)
        measures: Exact spherical measure of each atom
        membership: ``membership[r, a]`` is True when atom ``a`` lies in input region ``r``
        grid: Grid whose cells are the atoms (cell mode)
        bounds: Angular interval of each atom (interval mode)
        shared: The single non-trivial region (split mode)
    """
    dim: int
    mode: str
    measures: np.ndarray
    membership: np.ndarray
    grid: Optional[SphereGrid] = None
    bounds: Tuple[Tuple[float, float], ...] = ()
    shared: Optional[SphericalRegion] = None

    @property
    def size(self) -> int:
        return len(self.measures)

    def merge(self, atoms: Sequence[int]) -> SphericalRegion:
        """Region covered by a set of atoms.

        Raises:
            RequiresGridError: In split mode, when the complement of the shared region is requested
        """
        atoms = sorted(set(int(a) for a in atoms))
        if self.mode == CELL:
            return CellSet(self.grid.grid_id, frozenset(atoms))
        if self.mode == INTERVAL:
            return arc_region(self.bounds[a] for a in atoms)
        if self.mode == FULL:
            return FullSphere(self.dim)
        if atoms == [0]:
            return self.shared
        if atoms == [0, 1]:
            return FullSphere(self.dim)
        raise RequiresGridError(
            f"the complement of a {type(self.shared).__name__} has no exact region; supply a grid"
        )


@functools.lru_cache(maxsize=4096)
def region_cells(region: SphericalRegion, grid: SphereGrid) -> FrozenSet[int]:
    """Cells forming ``region`` exactly.

    Raises:
        RequiresGridError: If the region boundary crosses a cell
    """
    raster = rasterize(region, grid)
    if raster.error_bound > 0.0:
        raise RequiresGridError(
            f"{type(region).__name__} is not aligned with grid {grid.grid_id} "
            f"(boundary cells weigh {raster.error_bound:.3g})"
        )
    return raster.cells.indices


def _resolve_grid(
    regions: Sequence[SphericalRegion], grid: Optional[SphereGrid]
) -> Optional[SphereGrid]:
    ids = {r.grid_id for r in regions if isinstance(r, CellSet)}
    if grid is not None:
        ids.add(grid.grid_id)
    if len(ids) > 1:
        raise GridMismatchError(f"regions refer to different grids: {sorted(ids)}")
    if grid is not None:
        return grid
    if ids:
        return SphereGrid.from_id(ids.pop())
    return None


def _cell_refinement(regions: Sequence[SphericalRegion], dim: int, grid: SphereGrid) -> Refinement:
    if grid.dim != dim:
        raise DimensionError(f"grid {grid.grid_id} used for dimension {dim}")
    membership = np.zeros((len(regions), grid.size), dtype=bool)
    for r, region in enumerate(regions):
        membership[r, sorted(region_cells(region, grid))] = True
    return Refinement(
        dim=dim, mode=CELL, measures=np.asarray(grid.weights), membership=membership, grid=grid
    )


def _interval_refinement(regions: Sequence[SphericalRegion]) -> Refinement:
    intervals = [arc_intervals(region) for region in regions]
    points = {0.0, TWO_PI}
    for ivs in intervals:
        for s, e in ivs:
            points.add(s)
            points.add(e)
    edges = sorted(points)
    bounds = tuple((a, b) for a, b in zip(edges, edges[1:]) if b > a)
    membership = np.zeros((len(regions), len(bounds)), dtype=bool)
    for r, ivs in enumerate(intervals):
        for a, (lo, hi) in enumerate(bounds):
            mid = 0.5 * (lo + hi)
            membership[r, a] = any(s <= mid < e for s, e in ivs)
    measures = np.array([hi - lo for lo, hi in bounds], dtype=float)
    return Refinement(dim=2, mode=INTERVAL, measures=measures, membership=membership, bounds=bounds)


def common_refinement(
    regions: Sequence[SphericalRegion],
    dim: int,
    grid: Optional[SphereGrid] = None
) -> Refinement:
    """Refine ``regions`` into disjoint atoms with exact measures.

    Args:
        regions: Regions to refine, all of dimension ``dim``
        dim: Ambient dimension
        grid: Optional grid; when given (or when any region is a cell set) the
            atoms are the grid cells and every region must be aligned with it

    Raises:
        DimensionError: If a region has another dimension
        GridMismatchError: If cell sets refer to different grids
        RequiresGridError: If no exact refinement exists without a grid
    """
    regions = list(regions)
    for region in regions:
        if region.dim != dim:
            raise DimensionError(
                f"{type(region).__name__} of dimension {region.dim} refined in dimension {dim}"
            )

    shared_grid = _resolve_grid(regions, grid)
    if shared_grid is not None:
        return _cell_refinement(regions, dim, shared_grid)

    distinct: List[SphericalRegion] = []
    for region in regions:
        if not isinstance(region, FullSphere) and region not in distinct:
            distinct.append(region)

    if not distinct:
        measures = np.array([surface_measure(dim)])
        return Refinement(dim=dim, mode=FULL, measures=measures,
                          membership=np.ones((len(regions), 1), dtype=bool))
    if dim == 2:
        return _interval_refinement(regions)
    if len(distinct) == 1:
        shared = distinct[0]
        inner = region_measure(shared)
        measures = np.array([inner, surface_measure(dim) - inner])
        membership = np.array(
            [[True, isinstance(region, FullSphere)] for region in regions], dtype=bool
        ).reshape(len(regions), 2)
        return Refinement(
            dim=dim, mode=SPLIT, measures=measures, membership=membership, shared=shared
        )
    raise RequiresGridError(
        f"{len(distinct)} distinct regions in dimension {dim} have no exact overlay; supply a grid"
    )
