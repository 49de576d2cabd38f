"""Unit-sphere geometry: directions, rotations, regions, exact grids and spherical measure.

Angles are in radians. Arcs and grid cells are half-open ``[start, end)`` so that
partitions are genuinely disjoint. Exact grids exist for n = 2 (equal arcs) and
n = 3 (latitude bands x longitude sectors with closed-form band areas).
"""
from __future__ import annotations

import bisect
import functools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import betainc

from dualvol.errors import (
    DescriptorError,
    DimensionError,
    DomainError,
    GridMismatchError,
    RequiresGridError,
    UnsupportedGridError,
    UnsupportedRotationError,
)
from dualvol.utils.logging import get_logger

TWO_PI = 2.0 * math.pi
UNIT_TOL = 1e-12
SYMMETRY_TOL = 1e-9

logger = get_logger("dmv.sphere")


def wrap_angle(theta: float) -> float:
    """Reduce an angle to ``[0, 2π)``."""
    theta = math.fmod(theta, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    if theta >= TWO_PI:
        theta = 0.0
    return theta


def _wrap_angles(theta: np.ndarray) -> np.ndarray:
    theta = np.mod(theta, TWO_PI)
    return np.where(theta >= TWO_PI, 0.0, theta)


def surface_measure(dim: int) -> float:
    """Hausdorff measure of the unit sphere in R^dim, ``2π^{n/2} / Γ(n/2)``.

    Raises:
        DomainError: If ``dim < 2``
    """
    if dim < 2:
        raise DomainError(f"sphere dimension must be >= 2, got {dim}")
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)


# ---------------------------------------------------------------------------
# Directions and rotations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Direction:
    """A point of the unit sphere S^{n-1}."""
    coords: Tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if len(coords) < 2:
            raise DimensionError(f"directions need at least 2 coordinates, got {len(coords)}")
        norm = math.sqrt(math.fsum(c * c for c in coords))
        if abs(norm - 1.0) > UNIT_TOL:
            raise DomainError(f"direction is not a unit vector (norm {norm!r})")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def normalized(cls, vector: Iterable[float]) -> "Direction":
        """Scale a nonzero vector onto the sphere."""
        values = [float(v) for v in vector]
        norm = math.sqrt(math.fsum(v * v for v in values))
        if norm == 0.0 or not math.isfinite(norm):
            raise DomainError("cannot normalize a zero or non-finite vector")
        return cls(tuple(v / norm for v in values))

    @classmethod
    def from_angle(cls, theta: float) -> "Direction":
        """Point of S^1 at angle ``theta``."""
        return cls((math.cos(theta), math.sin(theta)))

    @classmethod
    def from_spherical(cls, polar: float, azimuth: float) -> "Direction":
        """Point of S^2 from polar angle (from +z) and azimuth."""
        s = math.sin(polar)
        return cls((s * math.cos(azimuth), s * math.sin(azimuth), math.cos(polar)))

    @property
    def angle(self) -> float:
        """Azimuth of the first two coordinates in ``[0, 2π)``."""
        return wrap_angle(math.atan2(self.coords[1], self.coords[0]))

    @property
    def polar(self) -> float:
        """Angle from the last coordinate axis."""
        return math.acos(max(-1.0, min(1.0, self.coords[-1])))

    def angle_to(self, other: "Direction") -> float:
        """Great-circle distance."""
        dot = math.fsum(a * b for a, b in zip(self.coords, other.coords))
        return math.acos(max(-1.0, min(1.0, dot)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


@dataclass(frozen=True)
class Rotation:
    """An element of SO(n), stored as its matrix."""
    matrix: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        n = len(rows)
        if n < 2 or any(len(row) != n for row in rows):
            raise DimensionError("rotation matrix must be square with size >= 2")
        m = np.asarray(rows)
        if np.max(np.abs(m.T @ m - np.eye(n))) > UNIT_TOL:
            raise DomainError("rotation matrix is not orthogonal")
        if abs(np.linalg.det(m) - 1.0) > UNIT_TOL:
            raise DomainError("rotation matrix must have determinant +1")

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @classmethod
    def identity(cls, dim: int) -> "Rotation":
        return cls(tuple(tuple(1.0 if i == j else 0.0 for j in range(dim)) for i in range(dim)))

    @classmethod
    def planar(cls, angle: float) -> "Rotation":
        """Counter-clockwise rotation of the plane."""
        c, s = math.cos(angle), math.sin(angle)
        return cls(((c, -s), (s, c)))

    @classmethod
    def azimuthal(cls, angle: float) -> "Rotation":
        """Rotation of R^3 about the z-axis."""
        c, s = math.cos(angle), math.sin(angle)
        return cls(((c, -s, 0.0), (s, c, 0.0), (0.0, 0.0, 1.0)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    def inverse(self) -> "Rotation":
        return Rotation(tuple(zip(*self.matrix)))

    def apply(self, u: Direction) -> Direction:
        if u.dim != self.dim:
            raise DimensionError(
                f"rotation of dimension {self.dim} applied to direction of dimension {u.dim}"
            )
        return Direction.normalized(self.as_array() @ u.as_array())

    def apply_many(self, points: np.ndarray) -> np.ndarray:
        """Rotate each row of ``points``."""
        return np.asarray(points, dtype=float) @ self.as_array().T

    @property
    def planar_angle(self) -> Optional[float]:
        """Rotation angle for planar rotations and rotations about the z-axis, else None."""
        m = self.matrix
        if self.dim == 3:
            if abs(m[2][2] - 1.0) > UNIT_TOL:
                return None
        elif self.dim != 2:
            return None
        return wrap_angle(math.atan2(m[1][0], m[0][0]))

    def is_close(self, other: "Rotation", tol: float = SYMMETRY_TOL) -> bool:
        if other.dim != self.dim:
            return False
        return bool(np.max(np.abs(self.as_array() - other.as_array())) <= tol)


def rotate_direction(phi: Rotation, u: Direction) -> Direction:
    """Image of ``u`` under ``phi``."""
    return phi.apply(u)


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

class SphericalRegion(ABC):
    """A measurable subset of S^{n-1}. Subclasses expose ``dim``."""

    dim: int

    @abstractmethod
    def contains(self, u: Direction) -> bool:
        """Membership of a single direction."""

    @abstractmethod
    def contains_many(self, points: np.ndarray) -> np.ndarray:
        """Membership of each row of an ``(N, n)`` array of unit vectors."""

    @abstractmethod
    def to_descriptor(self) -> Dict:
        """JSON region descriptor."""


def _check_point_dim(region: SphericalRegion, dim: int):
    if dim != region.dim:
        raise DimensionError(
            f"region of dimension {region.dim} evaluated at a direction of dimension {dim}"
        )


@dataclass(frozen=True)
class FullSphere(SphericalRegion):
    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise DomainError(f"sphere dimension must be >= 2, got {self.dim}")

    def contains(self, u: Direction) -> bool:
        _check_point_dim(self, u.dim)
        return True

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        return np.ones(len(points), dtype=bool)

    def to_descriptor(self) -> Dict:
        return {"type": "full"}


def _validate_interval(start: float, end: float):
    if not (0.0 <= start < end <= TWO_PI):
        raise DomainError(f"arc must satisfy 0 <= start < end <= 2π, got [{start}, {end})")


@dataclass(frozen=True)
class Arc(SphericalRegion):
    """Half-open arc ``[start, end)`` of S^1."""
    start: float
    end: float

    def __post_init__(self):
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "end", float(self.end))
        _validate_interval(self.start, self.end)

    @property
    def dim(self) -> int:
        return 2

    @property
    def intervals(self) -> Tuple[Tuple[float, float], ...]:
        return ((self.start, self.end),)

    def contains(self, u: Direction) -> bool:
        _check_point_dim(self, u.dim)
        return self.start <= u.angle < self.end

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        theta = _wrap_angles(np.arctan2(points[:, 1], points[:, 0]))
        return (theta >= self.start) & (theta < self.end)

    def to_descriptor(self) -> Dict:
        return {"type": "arc", "start": self.start, "end": self.end}


@dataclass(frozen=True)
class ArcSet(SphericalRegion):
    """Finite union of disjoint half-open arcs, sorted by start."""
    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(s), float(e)) for s, e in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        previous_end = 0.0
        for s, e in ivs:
            _validate_interval(s, e)
            if s < previous_end:
                raise DomainError("arc set intervals must be sorted and disjoint")
            previous_end = e

    @property
    def dim(self) -> int:
        return 2

    def contains(self, u: Direction) -> bool:
        _check_point_dim(self, u.dim)
        theta = u.angle
        return any(s <= theta < e for s, e in self.intervals)

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        theta = _wrap_angles(np.arctan2(points[:, 1], points[:, 0]))
        mask = np.zeros(len(points), dtype=bool)
        for s, e in self.intervals:
            mask |= (theta >= s) & (theta < e)
        return mask

    def to_descriptor(self) -> Dict:
        return {"type": "arcs", "intervals": [[s, e] for s, e in self.intervals]}


@dataclass(frozen=True)
class Cap(SphericalRegion):
    """Closed geodesic ball of angular radius ``radius`` in (0, π]."""
    center: Direction
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "radius", float(self.radius))
        if not (0.0 < self.radius <= math.pi):
            raise DomainError(f"cap radius must lie in (0, π], got {self.radius}")

    @property
    def dim(self) -> int:
        return self.center.dim

    def contains(self, u: Direction) -> bool:
        _check_point_dim(self, u.dim)
        if self.radius >= math.pi:
            return True
        return self.center.angle_to(u) <= self.radius

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        if self.radius >= math.pi:
            return np.ones(len(points), dtype=bool)
        dots = np.clip(np.asarray(points) @ self.center.as_array(), -1.0, 1.0)
        return np.arccos(dots) <= self.radius

    def to_descriptor(self) -> Dict:
        return {"type": "cap", "center": list(self.center.coords), "radius": self.radius}


@dataclass(frozen=True)
class CellSet(SphericalRegion):
    """Union of cells of an exact grid, referenced by grid id."""
    grid_id: str
    indices: FrozenSet[int]

    def __post_init__(self):
        indices = frozenset(int(i) for i in self.indices)
        object.__setattr__(self, "indices", indices)
        size = self.grid.size
        bad = [i for i in indices if not 0 <= i < size]
        if bad:
            raise DomainError(
                f"cell indices {sorted(bad)} out of range for grid {self.grid_id} ({size} cells)"
            )

    @property
    def grid(self) -> "SphereGrid":
        return SphereGrid.from_id(self.grid_id)

    @property
    def dim(self) -> int:
        return self.grid.dim

    def contains(self, u: Direction) -> bool:
        _check_point_dim(self, u.dim)
        return self.grid.locate(u) in self.indices

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        if not self.indices:
            return np.zeros(len(points), dtype=bool)
        return np.isin(self.grid.locate_many(points), sorted(self.indices))

    def to_descriptor(self) -> Dict:
        return {"type": "cells", "grid": self.grid_id, "indices": sorted(self.indices)}


def _split_wrapped(start: float, end: float) -> List[Tuple[float, float]]:
    """Intervals of ``[start, end)`` taken modulo 2π, for ``end - start <= 2π``."""
    if end - start >= TWO_PI:
        return [(0.0, TWO_PI)]
    shift = math.floor(start / TWO_PI) * TWO_PI
    s, e = start - shift, end - shift
    if s >= TWO_PI:
        s, e = s - TWO_PI, e - TWO_PI
    if e <= TWO_PI:
        return [(s, e)] if e > s else []
    pieces = [(s, TWO_PI), (0.0, e - TWO_PI)]
    return sorted((a, b) for a, b in pieces if b > a)


def arc_region(intervals: Iterable[Tuple[float, float]]) -> SphericalRegion:
    """Region of S^1 covered by ``intervals``, coalesced into its simplest form."""
    merged: List[List[float]] = []
    for s, e in sorted((float(a), float(b)) for a, b in intervals if b > a):
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    if len(merged) == 1:
        s, e = merged[0]
        if s == 0.0 and e >= TWO_PI:
            return FullSphere(2)
        return Arc(s, e)
    return ArcSet(tuple((s, e) for s, e in merged))


def arc_intervals(region: SphericalRegion) -> Tuple[Tuple[float, float], ...]:
    """Sorted disjoint intervals of a region of S^1.

    Raises:
        RequiresGridError: If the region is not a union of arcs
    """
    if region.dim != 2:
        raise DimensionError(f"arc intervals requested for a region of dimension {region.dim}")
    if isinstance(region, FullSphere):
        return ((0.0, TWO_PI),)
    if isinstance(region, (Arc, ArcSet)):
        return region.intervals
    if isinstance(region, Cap):
        if region.radius >= math.pi:
            return ((0.0, TWO_PI),)
        center = region.center.angle
        return tuple(_split_wrapped(center - region.radius, center + region.radius))
    if isinstance(region, CellSet):
        grid = region.grid
        return arc_intervals(arc_region(grid.cells[i].bounds[0] for i in sorted(region.indices)))
    raise RequiresGridError(f"region {type(region).__name__} is not a union of arcs")


def _cap_measure(dim: int, radius: float) -> float:
    total = surface_measure(dim)
    if radius >= math.pi:
        return total
    if dim == 2:
        return 2.0 * radius
    if dim == 3:
        return TWO_PI * (1.0 - math.cos(radius))
    if radius <= math.pi / 2.0:
        return 0.5 * total * float(betainc((dim - 1) / 2.0, 0.5, math.sin(radius) ** 2))
    return total - _cap_measure(dim, math.pi - radius)


def region_measure(region: SphericalRegion, dim: Optional[int] = None) -> float:
    """Spherical (H^{n-1}) measure of a region.

    Args:
        region: Region to measure
        dim: Expected ambient dimension, checked against the region

    Raises:
        DimensionError: If ``dim`` disagrees with the region (e.g. an arc outside n = 2)
    """
    if dim is not None and region.dim != dim:
        raise DimensionError(f"{type(region).__name__} has dimension {region.dim}, requested {dim}")
    if isinstance(region, FullSphere):
        return surface_measure(region.dim)
    if isinstance(region, Arc):
        return region.end - region.start
    if isinstance(region, ArcSet):
        return math.fsum(e - s for s, e in region.intervals)
    if isinstance(region, Cap):
        return _cap_measure(region.dim, region.radius)
    if isinstance(region, CellSet):
        weights = region.grid.weights
        return math.fsum(float(weights[i]) for i in sorted(region.indices))
    raise DomainError(f"unknown region type {type(region).__name__}")


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridCell:
    """One cell: angular bounds per axis, an interior representative and its exact measure."""
    index: int
    bounds: Tuple[Tuple[float, float], ...]
    representative: Direction
    weight: float


def parse_grid_spec(text: str) -> Dict[str, int]:
    """Parse ``dim=2,m=64`` or ``dim=3,bands=4,sectors=8``."""
    spec: Dict[str, int] = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise DescriptorError(f"expected key=value, got {part!r}", field="grid")
        try:
            spec[key.strip()] = int(value)
        except ValueError as e:
            raise DescriptorError(
                f"{key.strip()} must be an integer, got {value!r}", field="grid"
            ) from e
    if "dim" not in spec:
        raise DescriptorError("grid spec needs dim", field="grid.dim")
    return spec


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Finite partition of S^{n-1} into cells with closed-form measures."""
    dim: int
    shape: Tuple[int, ...]
    edges: Tuple[Tuple[float, ...], ...]
    cells: Tuple[GridCell, ...]

    @property
    def grid_id(self) -> str:
        if self.dim == 2:
            return f"dim=2,m={self.shape[0]}"
        return f"dim=3,bands={self.shape[0]},sectors={self.shape[1]}"

    def __eq__(self, other) -> bool:
        return isinstance(other, SphereGrid) and other.grid_id == self.grid_id

    def __hash__(self) -> int:
        return hash(self.grid_id)

    def __repr__(self) -> str:
        return f"SphereGrid({self.grid_id})"

    @classmethod
    def from_id(cls, grid_id: str) -> "SphereGrid":
        spec = parse_grid_spec(grid_id)
        return make_grid(**spec)

    @property
    def size(self) -> int:
        return len(self.cells)

    @cached_property
    def weights(self) -> np.ndarray:
        weights = np.array([cell.weight for cell in self.cells], dtype=float)
        weights.setflags(write=False)
        return weights

    @cached_property
    def representatives(self) -> np.ndarray:
        reps = np.array([cell.representative.coords for cell in self.cells], dtype=float)
        reps.setflags(write=False)
        return reps

    @property
    def total_measure(self) -> float:
        return math.fsum(cell.weight for cell in self.cells)

    def to_descriptor(self) -> Dict:
        if self.dim == 2:
            return {"dim": 2, "m": self.shape[0]}
        return {"dim": 3, "bands": self.shape[0], "sectors": self.shape[1]}

    def cell_region(self, index: int) -> CellSet:
        return CellSet(self.grid_id, frozenset({index}))

    def all_cells(self) -> CellSet:
        return CellSet(self.grid_id, frozenset(range(self.size)))

    def locate(self, u: Direction) -> int:
        """Index of the cell containing ``u``."""
        if u.dim != self.dim:
            raise DimensionError(
                f"grid of dimension {self.dim} evaluated at a direction of dimension {u.dim}"
            )
        if self.dim == 2:
            return self._slot(self.edges[0], u.angle)
        band = self._slot(self.edges[0], u.polar)
        sector = self._slot(self.edges[1], u.angle)
        return band * self.shape[1] + sector

    def locate_many(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        azimuth = _wrap_angles(np.arctan2(points[:, 1], points[:, 0]))
        if self.dim == 2:
            return self._slots(self.edges[0], azimuth)
        polar = np.arccos(np.clip(points[:, 2], -1.0, 1.0))
        band = self._slots(self.edges[0], polar)
        return band * self.shape[1] + self._slots(self.edges[1], azimuth)

    @staticmethod
    def _slot(edges: Sequence[float], value: float) -> int:
        return min(max(bisect.bisect_right(edges, value) - 1, 0), len(edges) - 2)

    @staticmethod
    def _slots(edges: Sequence[float], values: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(np.asarray(edges), values, side="right") - 1
        return np.clip(idx, 0, len(edges) - 2)

    def cell_angular_radius(self, index: int) -> float:
        """Upper bound on the distance from a cell's representative to any point of the cell."""
        cell = self.cells[index]
        if self.dim == 2:
            s, e = cell.bounds[0]
            return (e - s) / 2.0
        (p0, p1), (a0, a1) = cell.bounds
        s_max = 1.0 if p0 <= math.pi / 2.0 <= p1 else max(math.sin(p0), math.sin(p1))
        # meridian leg plus parallel leg
        return (p1 - p0) / 2.0 + s_max * (a1 - a0) / 2.0


def _circle_grid(m: int) -> SphereGrid:
    edges = [TWO_PI * k / m for k in range(m)] + [TWO_PI]
    weight = TWO_PI / m
    cells = tuple(
        GridCell(
            index=k,
            bounds=((edges[k], edges[k + 1]),),
            representative=Direction.from_angle(TWO_PI * (k + 0.5) / m),
            weight=weight,
        )
        for k in range(m)
    )
    return SphereGrid(dim=2, shape=(m,), edges=(tuple(edges),), cells=cells)


def _latlon_grid(bands: int, sectors: int) -> SphereGrid:
    polar = [math.pi * i / bands for i in range(bands)] + [math.pi]
    azimuth = [TWO_PI * j / sectors for j in range(sectors)] + [TWO_PI]
    width = TWO_PI / sectors
    cells = []
    for i in range(bands):
        band_area = width * (math.cos(polar[i]) - math.cos(polar[i + 1]))
        mid_polar = math.pi * (i + 0.5) / bands
        for j in range(sectors):
            cells.append(GridCell(
                index=i * sectors + j,
                bounds=((polar[i], polar[i + 1]), (azimuth[j], azimuth[j + 1])),
                representative=Direction.from_spherical(mid_polar, TWO_PI * (j + 0.5) / sectors),
                weight=band_area,
            ))
    return SphereGrid(
        dim=3, shape=(bands, sectors), edges=(tuple(polar), tuple(azimuth)), cells=tuple(cells)
    )


@functools.lru_cache(maxsize=None)
def _build_grid(dim: int, shape: Tuple[int, ...]) -> SphereGrid:
    grid = _circle_grid(*shape) if dim == 2 else _latlon_grid(*shape)
    logger.debug(f"Built grid {grid.grid_id} with {grid.size} cells")
    return grid


def make_grid(dim: int, m: Optional[int] = None, bands: Optional[int] = None,
              sectors: Optional[int] = None) -> SphereGrid:
    """Build an exact grid.

    Args:
        dim: Ambient dimension (2 or 3)
        m: Number of equal arcs (n = 2)
        bands: Number of latitude bands (n = 3)
        sectors: Number of longitude sectors (n = 3)

    Raises:
        DomainError: If ``dim < 2`` or a resolution parameter is missing or not positive
        UnsupportedGridError: If ``dim >= 4``
    """
    if dim < 2:
        raise DomainError(f"sphere dimension must be >= 2, got {dim}")
    if dim >= 4:
        raise UnsupportedGridError(f"no exact grid for dimension {dim}; use the Monte Carlo path")
    if dim == 2:
        if m is None or m < 1:
            raise DomainError(f"a circle grid needs m >= 1, got {m}")
        return _build_grid(2, (int(m),))
    if bands is None or sectors is None or bands < 1 or sectors < 1:
        raise DomainError(
            f"a sphere grid needs bands >= 1 and sectors >= 1, got {bands}, {sectors}"
        )
    return _build_grid(3, (int(bands), int(sectors)))


@dataclass(frozen=True)
class RasterResult:
    """Cells whose representatives lie in a region, with a bound on the measure error."""
    cells: CellSet
    error_bound: float


def rasterize(region: SphericalRegion, grid: SphereGrid) -> RasterResult:
    """Approximate a region by the grid cells whose representatives it contains.

    ``|σ(region) - σ(cells)|`` is at most ``error_bound``, the total weight of cells
    the region boundary may cross.
    """
    if region.dim != grid.dim:
        raise DimensionError(f"region of dimension {region.dim} rasterized on grid {grid.grid_id}")
    if isinstance(region, FullSphere) or (isinstance(region, Cap) and region.radius >= math.pi):
        return RasterResult(grid.all_cells(), 0.0)
    if isinstance(region, CellSet):
        if region.grid_id != grid.grid_id:
            raise GridMismatchError(f"cell set on {region.grid_id} rasterized on {grid.grid_id}")
        return RasterResult(region, 0.0)

    inside = region.contains_many(grid.representatives)
    straddling: List[float] = []
    if grid.dim == 2:
        intervals = arc_intervals(region)
        for cell in grid.cells:
            a, b = cell.bounds[0]
            overlap = math.fsum(max(0.0, min(b, e) - max(a, s)) for s, e in intervals)
            length = b - a
            slack = 1e-12 * length
            if overlap >= length - slack:
                inside[cell.index] = True
            elif overlap <= slack:
                inside[cell.index] = False
            else:
                straddling.append(cell.weight)
    elif (
        isinstance(region, Cap)
        and grid.dim == 3
        and abs(abs(region.center.coords[2]) - 1.0) <= UNIT_TOL
    ):
        # pole-centred caps are bounded by a parallel, so only one band can straddle
        north = region.center.coords[2] > 0.0
        for cell in grid.cells:
            p0, p1 = cell.bounds[0]
            if not north:
                p0, p1 = math.pi - p1, math.pi - p0
            slack = 1e-12 * (p1 - p0)
            if region.radius >= p1 - slack:
                inside[cell.index] = True
            elif region.radius <= p0 + slack:
                inside[cell.index] = False
            else:
                straddling.append(cell.weight)
    elif isinstance(region, Cap):
        for cell in grid.cells:
            distance = region.center.angle_to(cell.representative)
            reach = grid.cell_angular_radius(cell.index)
            if distance + reach > region.radius and distance - reach <= region.radius:
                straddling.append(cell.weight)
    else:
        raise RequiresGridError(f"cannot rasterize {type(region).__name__} on {grid.grid_id}")

    cells = CellSet(grid.grid_id, frozenset(int(i) for i in np.nonzero(inside)[0]))
    return RasterResult(cells, math.fsum(straddling))


# ---------------------------------------------------------------------------
# Symmetries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSymmetry:
    """A rotation that maps grid cells onto grid cells; cell k goes to ``permutation[k]``."""
    rotation: Rotation
    permutation: Tuple[int, ...]

    @property
    def is_identity(self) -> bool:
        return all(i == k for i, k in enumerate(self.permutation))

    def apply_indices(self, indices: Iterable[int]) -> FrozenSet[int]:
        return frozenset(self.permutation[i] for i in indices)


@functools.lru_cache(maxsize=64)
def grid_symmetries(grid: SphereGrid) -> Tuple[GridSymmetry, ...]:
    """Rotations permuting the cells of ``grid`` exactly, identity first.

    Each candidate is verified by mapping every representative into a cell of equal weight.
    """
    if grid.dim == 2:
        count = grid.shape[0]
        candidates = [Rotation.planar(TWO_PI * k / count) for k in range(count)]
    else:
        count = grid.shape[1]
        candidates = [Rotation.azimuthal(TWO_PI * k / count) for k in range(count)]

    symmetries = []
    for rotation in candidates:
        targets = grid.locate_many(rotation.apply_many(grid.representatives))
        permutation = tuple(int(t) for t in targets)
        weights = grid.weights
        if sorted(permutation) != list(range(grid.size)) or np.any(
            np.abs(weights[list(permutation)] - weights) > 1e-12 * weights
        ):
            logger.warning(
                f"Discarding candidate symmetry of {grid.grid_id}: cells not permuted exactly"
            )
            continue
        symmetries.append(GridSymmetry(rotation, permutation))
    return tuple(symmetries)


def find_symmetry(grid: SphereGrid, rotation: Rotation) -> Optional[GridSymmetry]:
    """The grid symmetry equal to ``rotation``, if any."""
    for symmetry in grid_symmetries(grid):
        if symmetry.rotation.is_close(rotation):
            return symmetry
    return None


def rotate_region(phi: Rotation, region: SphericalRegion) -> SphericalRegion:
    """Image ``φ(A)`` of a region.

    Raises:
        UnsupportedRotationError: For cell sets when ``φ`` is not a symmetry of their grid
    """
    if phi.dim != region.dim:
        raise DimensionError(
            f"rotation of dimension {phi.dim} applied to region of dimension {region.dim}"
        )
    if isinstance(region, FullSphere):
        return region
    if isinstance(region, Cap):
        return Cap(phi.apply(region.center), region.radius)
    if isinstance(region, CellSet):
        symmetry = find_symmetry(region.grid, phi)
        if symmetry is None:
            raise UnsupportedRotationError(f"rotation is not a symmetry of grid {region.grid_id}")
        return CellSet(region.grid_id, symmetry.apply_indices(region.indices))
    if isinstance(region, (Arc, ArcSet)):
        angle = phi.planar_angle
        pieces: List[Tuple[float, float]] = []
        for s, e in region.intervals:
            pieces.extend(_split_wrapped(s + angle, e + angle))
        return arc_region(pieces)
    raise DomainError(f"unknown region type {type(region).__name__}")
