"""Star sets through their radial functions.

Three representations are supported:

* ``SimpleRadial``: finitely many ``(level, region)`` terms, the value at ``u``
  being the largest level whose region contains ``u``. In canonical form the
  regions are disjoint and the levels distinct and positive; these are the
  polycones.
* ``GridRadial``: one value per cell of an exact grid.
* ``SamplerRadial``: a callable with a declared upper bound.

All operations return new values; nothing is mutated.
"""
from __future__ import annotations

import functools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from dualvol.core.refinement import Refinement, common_refinement, region_cells
from dualvol.core.sphere import (
    Direction,
    FullSphere,
    Rotation,
    SphereGrid,
    SphericalRegion,
    find_symmetry,
    region_measure,
    rotate_region,
)
from dualvol.errors import (
    ArityError,
    DimensionError,
    DomainError,
    GridMismatchError,
    RequiresGridError,
    UnsupportedRotationError,
)
from dualvol.utils.logging import get_logger

logger = get_logger("dmv.starset")

Term = Tuple[float, SphericalRegion]


def _check_level(level: float) -> float:
    level = float(level)
    if not math.isfinite(level):
        raise DomainError(f"radial levels must be finite, got {level}")
    if level < 0.0:
        raise DomainError(f"radial levels must be nonnegative, got {level}")
    return level


class RadialFunction(ABC):
    """A bounded nonnegative function on S^{n-1}."""

    dim: int

    @abstractmethod
    def evaluate(self, u: Direction) -> float:
        """Value at one direction."""

    @abstractmethod
    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Values at each row of an ``(N, n)`` array of unit vectors."""

    @abstractmethod
    def sup_norm(self) -> float:
        """Upper bound of the function (exact for simple and grid functions)."""

    @property
    @abstractmethod
    def is_continuous(self) -> bool:
        """Whether the function is known to be continuous."""

    @abstractmethod
    def to_descriptor(self) -> Dict:
        """JSON radial-function descriptor."""


@dataclass(frozen=True)
class SimpleRadial(RadialFunction):
    dim: int
    terms: Tuple[Term, ...]
    canonical: bool = False

    def __post_init__(self):
        terms = tuple((_check_level(level), region) for level, region in self.terms)
        object.__setattr__(self, "terms", terms)
        for _, region in terms:
            if region.dim != self.dim:
                raise DimensionError(
                    f"term region of dimension {region.dim} "
                    f"in a radial function of dimension {self.dim}"
                )

    def evaluate(self, u: Direction) -> float:
        if u.dim != self.dim:
            raise DimensionError(
                f"radial function of dimension {self.dim} evaluated in dimension {u.dim}"
            )
        return max((level for level, region in self.terms if region.contains(u)), default=0.0)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        values = np.zeros(len(points), dtype=float)
        for level, region in self.terms:
            values = np.where(region.contains_many(points), np.maximum(values, level), values)
        return values

    def sup_norm(self) -> float:
        levels = (level for level, region in self.terms if region_measure(region) > 0.0)
        return max(levels, default=0.0)

    @property
    def is_continuous(self) -> bool:
        live = [(level, r) for level, r in self.terms if level > 0.0 and region_measure(r) > 0.0]
        return not live or (len(live) == 1 and isinstance(live[0][1], FullSphere))

    def to_descriptor(self) -> Dict:
        return {
            "type": "simple",
            "terms": [
                {"alpha": level, "base": region.to_descriptor()} for level, region in self.terms
            ],
        }


@dataclass(frozen=True)
class GridRadial(RadialFunction):
    grid: SphereGrid
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(_check_level(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.grid.size:
            raise DomainError(
                f"grid {self.grid.grid_id} has {self.grid.size} cells, got {len(values)} values"
            )

    @property
    def dim(self) -> int:
        return self.grid.dim

    def evaluate(self, u: Direction) -> float:
        return self.values[self.grid.locate(u)]

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.values, dtype=float)[self.grid.locate_many(points)]

    def sup_norm(self) -> float:
        return max(self.values, default=0.0)

    @property
    def is_continuous(self) -> bool:
        return len(set(self.values)) <= 1

    def to_descriptor(self) -> Dict:
        return {"type": "grid", "grid": self.grid.grid_id, "values": list(self.values)}


@dataclass(frozen=True, eq=False)
class SamplerRadial(RadialFunction):
    """Radial function given by a callable.

    The callable must be safe to call from several threads. Every value is checked
    against ``[0, bound]``.

    Attributes:
        dim: Ambient dimension
        fn: ``Direction -> float``
        bound: Declared upper bound ``M``
        continuous: Whether the caller certifies continuity (star body)
        many: Optional vectorized form ``(N, n) array -> (N,) array``
    """
    dim: int
    fn: Callable[[Direction], float]
    bound: float
    continuous: bool = False
    many: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        bound = _check_level(self.bound)
        object.__setattr__(self, "bound", bound)

    def _check(self, values: np.ndarray) -> np.ndarray:
        if values.size and (not np.all(np.isfinite(values)) or values.min() < 0.0
                            or values.max() > self.bound * (1.0 + 1e-12)):
            raise DomainError(f"sampler returned values outside [0, {self.bound}]")
        return values

    def evaluate(self, u: Direction) -> float:
        if u.dim != self.dim:
            raise DimensionError(
                f"radial function of dimension {self.dim} evaluated in dimension {u.dim}"
            )
        return float(self._check(np.array([float(self.fn(u))]))[0])

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        if self.many is not None:
            values = np.asarray(self.many(np.asarray(points, dtype=float)), dtype=float)
        else:
            values = np.array([float(self.fn(Direction(tuple(p)))) for p in points], dtype=float)
        return self._check(values)

    def sup_norm(self) -> float:
        return self.bound

    @property
    def is_continuous(self) -> bool:
        return self.continuous

    def to_descriptor(self) -> Dict:
        return {"type": "sampler", "bound": self.bound, "continuous": self.continuous}


@dataclass(frozen=True)
class StarSet:
    """A star set of R^dim, identified with its radial function."""
    dim: int
    rho: RadialFunction

    def __post_init__(self):
        if self.dim < 2:
            raise DomainError(f"dimension must be >= 2, got {self.dim}")
        if self.rho.dim != self.dim:
            raise DimensionError(
                f"radial function of dimension {self.rho.dim} in a star set of dimension {self.dim}"
            )

    @property
    def is_body(self) -> bool:
        return self.rho.is_continuous

    def to_descriptor(self) -> Dict:
        return {"dim": self.dim, "rho": self.rho.to_descriptor()}


@dataclass(frozen=True)
class Polycone(StarSet):
    """Finite union of cones, stored in canonical form."""

    def __post_init__(self):
        super().__post_init__()
        if not isinstance(self.rho, SimpleRadial) or not self.rho.canonical:
            raise DomainError("a polycone needs a canonical simple radial function")

    @property
    def terms(self) -> Tuple[Term, ...]:
        return self.rho.terms

    @property
    def is_cone(self) -> bool:
        return len(self.rho.terms) == 1


def _polycone(dim: int, terms: Iterable[Term]) -> Polycone:
    return Polycone(dim, SimpleRadial(dim, tuple(terms), canonical=True))


def origin(dim: int) -> Polycone:
    """The trivial star set {o}."""
    return _polycone(dim, ())


def ball(dim: int, radius: float = 1.0) -> Polycone:
    """Centred ball of the given radius."""
    radius = _check_level(radius)
    if radius == 0.0:
        return origin(dim)
    return _polycone(dim, ((radius, FullSphere(dim)),))


def unit_ball(dim: int) -> Polycone:
    return ball(dim, 1.0)


def cone(alpha: float, base: SphericalRegion) -> Polycone:
    """Cone of radius ``alpha`` over ``base``: radial function ``alpha * 1_base``."""
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0.0:
        raise DomainError(f"cone radius must be positive, got {alpha}")
    return _polycone(base.dim, ((alpha, base),))


def star_hull(base: SphericalRegion) -> Polycone:
    """Star hull st A, the cone of radius 1 over ``base``."""
    return cone(1.0, base)


def _same_dim(bodies: Sequence[StarSet]) -> int:
    if not bodies:
        raise ArityError("at least one star set is required")
    dims = {body.dim for body in bodies}
    if len(dims) != 1:
        raise DimensionError(f"star sets of different dimensions: {sorted(dims)}")
    return dims.pop()


def _simple(body: StarSet) -> SimpleRadial:
    if not isinstance(body.rho, SimpleRadial):
        raise DomainError(f"expected a simple radial function, got {type(body.rho).__name__}")
    return body.rho


def tabulate_simple(
    bodies: Sequence[StarSet],
    dim: int,
    grid: Optional[SphereGrid] = None
) -> Tuple[Refinement, np.ndarray]:
    """Values of simple radial functions on the atoms of their common refinement.

    Returns:
        The refinement and a ``(len(bodies), atoms)`` value array
    """
    regions: List[SphericalRegion] = []
    index: Dict[SphericalRegion, int] = {}
    for body in bodies:
        for _, region in _simple(body).terms:
            if region not in index:
                index[region] = len(regions)
                regions.append(region)
    refinement = common_refinement(regions, dim, grid)
    values = np.zeros((len(bodies), refinement.size), dtype=float)
    for b, body in enumerate(bodies):
        for level, region in body.rho.terms:
            mask = refinement.membership[index[region]]
            values[b] = np.where(mask, np.maximum(values[b], level), values[b])
    return refinement, values


def _from_atoms(refinement: Refinement, values: np.ndarray) -> Polycone:
    """Group atoms into level sets."""
    groups: Dict[float, List[int]] = {}
    for atom, value in enumerate(values):
        if value > 0.0 and refinement.measures[atom] > 0.0:
            groups.setdefault(float(value), []).append(atom)
    terms = [(level, refinement.merge(groups[level])) for level in sorted(groups)]
    return _polycone(refinement.dim, terms)


def canonicalize(
    terms: Iterable[Term],
    dim: Optional[int] = None,
    grid: Optional[SphereGrid] = None
) -> Polycone:
    """Rewrite ``(level, region)`` terms as a polycone with disjoint bases and distinct levels.

    Overlapping terms combine by maximum, so a repeated term counts once.

    Raises:
        DomainError: On a negative level
        RequiresGridError: If the regions cannot be refined exactly
    """
    checked: List[Term] = []
    for level, region in terms:
        level = _check_level(level)
        if dim is None:
            dim = region.dim
        if level > 0.0 and region_measure(region) > 0.0 and (level, region) not in checked:
            checked.append((level, region))
    if dim is None:
        raise DomainError("cannot infer the dimension of an empty term list")
    if not checked:
        return origin(dim)
    if len(checked) == 1 and grid is None:
        return _polycone(dim, checked)
    body = StarSet(dim, SimpleRadial(dim, tuple(checked)))
    refinement, values = tabulate_simple([body], dim, grid)
    return _from_atoms(refinement, values[0])


def radial_eval(body: StarSet, u) -> float:
    """``ρ_L(u)``.

    Raises:
        DomainError: If ``u`` is not a unit vector
        DimensionError: If dimensions differ
    """
    if not isinstance(u, Direction):
        u = Direction(tuple(u))
    if u.dim != body.dim:
        raise DimensionError(
            f"star set of dimension {body.dim} evaluated at a direction of dimension {u.dim}"
        )
    return body.rho.evaluate(u)


def _grid_of(bodies: Sequence[StarSet], grid: Optional[SphereGrid]) -> Optional[SphereGrid]:
    grids = {body.rho.grid for body in bodies if isinstance(body.rho, GridRadial)}
    if grid is not None:
        grids.add(grid)
    if len(grids) > 1:
        raise GridMismatchError(
            f"grid-sampled inputs on different grids: {sorted(g.grid_id for g in grids)}"
        )
    return grids.pop() if grids else None


@functools.lru_cache(maxsize=4096)
def _grid_values(rho: RadialFunction, grid: SphereGrid) -> np.ndarray:
    if isinstance(rho, GridRadial):
        if rho.grid != grid:
            raise GridMismatchError(f"values on {rho.grid.grid_id} requested on {grid.grid_id}")
        values = np.asarray(rho.values, dtype=float)
    elif isinstance(rho, SimpleRadial):
        values = np.zeros(grid.size, dtype=float)
        for level, region in rho.terms:
            cells = sorted(region_cells(region, grid))
            values[cells] = np.maximum(values[cells], level)
    else:
        values = rho.evaluate_many(grid.representatives)
    values.setflags(write=False)
    return values


def grid_values(body: StarSet, grid: SphereGrid) -> np.ndarray:
    """Per-cell values of ``ρ_L`` on ``grid`` (read-only).

    Simple functions must be aligned with the grid; samplers are evaluated at the
    cell representatives.

    Raises:
        GridMismatchError: For grid-sampled input on another grid
        RequiresGridError: For simple input not aligned with the grid
    """
    if body.dim != grid.dim:
        raise DimensionError(f"star set of dimension {body.dim} on grid {grid.grid_id}")
    return _grid_values(body.rho, grid)


def _sampler_sum(dim: int, rhos: Sequence[RadialFunction]) -> SamplerRadial:
    return SamplerRadial(
        dim=dim,
        fn=lambda u: math.fsum(rho.evaluate(u) for rho in rhos),
        bound=math.fsum(rho.sup_norm() for rho in rhos),
        continuous=all(rho.is_continuous for rho in rhos),
        many=lambda points: np.sum([rho.evaluate_many(points) for rho in rhos], axis=0),
    )


def radial_sum(*bodies: StarSet, grid: Optional[SphereGrid] = None) -> StarSet:
    """Radial sum ``L₁ +̃ ⋯ +̃ L_m``.

    Simple inputs give a canonical polycone. Grid-sampled inputs, or any input when
    ``grid`` is given, give a grid-sampled result. Samplers combine pointwise.

    Raises:
        GridMismatchError: If grid-sampled inputs use different grids
    """
    dim = _same_dim(bodies)
    rhos = [body.rho for body in bodies]
    if any(isinstance(rho, SamplerRadial) for rho in rhos) and grid is None:
        return StarSet(dim, _sampler_sum(dim, rhos))
    shared = _grid_of(bodies, grid)
    if shared is not None:
        total = np.sum([grid_values(body, shared) for body in bodies], axis=0)
        return StarSet(dim, GridRadial(shared, tuple(float(v) for v in total)))
    refinement, values = tabulate_simple(bodies, dim)
    return _from_atoms(refinement, values.sum(axis=0))


def scale(t: float, body: StarSet) -> StarSet:
    """Dilate by ``t ≥ 0``: ``ρ_{tL} = t ρ_L``.

    Raises:
        DomainError: If ``t < 0``
    """
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"scale factor must be nonnegative, got {t}")
    rho = body.rho
    if t == 0.0:
        return origin(body.dim)
    if isinstance(rho, SimpleRadial):
        terms = tuple((t * level, region) for level, region in rho.terms)
        scaled = SimpleRadial(body.dim, terms, rho.canonical)
        return Polycone(body.dim, scaled) if rho.canonical else StarSet(body.dim, scaled)
    if isinstance(rho, GridRadial):
        return StarSet(body.dim, GridRadial(rho.grid, tuple(t * v for v in rho.values)))
    return StarSet(body.dim, SamplerRadial(
        dim=body.dim,
        fn=lambda u: t * rho.evaluate(u),
        bound=t * rho.bound,
        continuous=rho.continuous,
        many=lambda points: t * rho.evaluate_many(points),
    ))


def rotate_starset(phi: Rotation, body: StarSet) -> StarSet:
    """Rotated star set ``φL`` with ``ρ_{φL}(u) = ρ_L(φ⁻¹u)``.

    Raises:
        UnsupportedRotationError: For grid-backed data when ``φ`` is not a grid symmetry
    """
    if phi.dim != body.dim:
        raise DimensionError(
            f"rotation of dimension {phi.dim} applied to a star set of dimension {body.dim}"
        )
    rho = body.rho
    if isinstance(rho, SimpleRadial):
        rotated = SimpleRadial(
            body.dim,
            tuple((level, rotate_region(phi, region)) for level, region in rho.terms),
            rho.canonical,
        )
        return Polycone(body.dim, rotated) if rho.canonical else StarSet(body.dim, rotated)
    if isinstance(rho, GridRadial):
        symmetry = find_symmetry(rho.grid, phi)
        if symmetry is None:
            raise UnsupportedRotationError(f"rotation is not a symmetry of grid {rho.grid.grid_id}")
        values = [0.0] * rho.grid.size
        for k, target in enumerate(symmetry.permutation):
            values[target] = rho.values[k]
        return StarSet(body.dim, GridRadial(rho.grid, tuple(values)))
    inverse = phi.inverse()
    return StarSet(body.dim, SamplerRadial(
        dim=body.dim,
        fn=lambda u: rho.evaluate(inverse.apply(u)),
        bound=rho.bound,
        continuous=rho.continuous,
        many=lambda points: rho.evaluate_many(inverse.apply_many(points)),
    ))


def _combine(bodies: Sequence[StarSet], grid: Optional[SphereGrid], reduce) -> Polycone:
    dim = _same_dim(bodies)
    refinement, values = tabulate_simple(bodies, dim, grid)
    return _from_atoms(refinement, reduce(values, axis=0))


def polycone_union(*cones: StarSet, grid: Optional[SphereGrid] = None) -> Polycone:
    """Union of polycones, ``ρ = max ρ_j``."""
    return _combine(cones, grid, np.max)


def polycone_intersect(*cones: StarSet, grid: Optional[SphereGrid] = None) -> Polycone:
    """Intersection of polycones, ``ρ = min ρ_j``."""
    return _combine(cones, grid, np.min)


def to_grid(body: StarSet, grid: SphereGrid, exact: bool = True) -> StarSet:
    """Grid-sampled copy of ``body``.

    Args:
        body: Star set to convert
        grid: Target grid
        exact: When False, simple functions not aligned with the grid are sampled
            at the cell representatives instead of raising

    Raises:
        RequiresGridError: If ``exact`` and a simple function is not aligned with the grid
    """
    try:
        values = grid_values(body, grid)
    except RequiresGridError:
        if exact:
            raise
        logger.debug(f"Sampling unaligned body at the representatives of {grid.grid_id}")
        values = body.rho.evaluate_many(grid.representatives)
    return StarSet(body.dim, GridRadial(grid, tuple(float(v) for v in values)))


def is_subset(inner: StarSet, outer: StarSet, grid: Optional[SphereGrid] = None) -> bool:
    """Whether ``inner ⊆ outer``, i.e. ``ρ_inner ≤ ρ_outer`` everywhere.

    Samplers are compared at the representatives of ``grid``.

    Raises:
        RequiresGridError: If a sampler is involved and no grid is given
    """
    dim = _same_dim([inner, outer])
    bodies = [inner, outer]
    shared = _grid_of(bodies, grid)
    if shared is None:
        if any(isinstance(b.rho, SamplerRadial) for b in bodies):
            raise RequiresGridError("comparing sampler star sets needs a grid")
        _, values = tabulate_simple(bodies, dim)
        return bool(np.all(values[0] <= values[1]))
    return bool(np.all(grid_values(inner, shared) <= grid_values(outer, shared)))
