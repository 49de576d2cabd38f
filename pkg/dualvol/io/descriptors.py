"""JSON descriptors for grids, regions, star sets and functionals.

Validation runs through pydantic models; every failure surfaces as a
``DescriptorError`` naming the offending field.
"""
import json
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from dualvol.core.sphere import (
    Arc,
    ArcSet,
    Cap,
    CellSet,
    Direction,
    FullSphere,
    SphereGrid,
    SphericalRegion,
    make_grid,
    parse_grid_spec,
)
from dualvol.core.starset import GridRadial, SimpleRadial, StarSet, canonicalize
from dualvol.errors import (
    DescriptorError,
    DimensionError,
    DualVolError,
    GridMismatchError,
    RequiresGridError,
)
from dualvol.functionals.base import Functional
from dualvol.functionals.implementations import DiagonalFunctional, KernelFunctional


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridModel(_Model):
    dim: int
    m: Optional[int] = None
    bands: Optional[int] = None
    sectors: Optional[int] = None


GridRef = Union[str, GridModel]


class ArcModel(_Model):
    type: Literal["arc"]
    start: float
    end: float


class ArcsModel(_Model):
    type: Literal["arcs"]
    intervals: List[Tuple[float, float]]


class CapModel(_Model):
    type: Literal["cap"]
    center: List[float]
    radius: float


class CellsModel(_Model):
    type: Literal["cells"]
    grid: GridRef
    indices: List[int]


class FullModel(_Model):
    type: Literal["full"]


RegionModel = Annotated[
    Union[ArcModel, ArcsModel, CapModel, CellsModel, FullModel],
    Field(discriminator="type"),
]


class TermModel(_Model):
    alpha: float
    base: RegionModel


class SimpleRhoModel(_Model):
    type: Literal["simple"]
    terms: List[TermModel]


class GridRhoModel(_Model):
    type: Literal["grid"]
    grid: GridRef
    values: List[float]


RhoModel = Annotated[Union[SimpleRhoModel, GridRhoModel], Field(discriminator="type")]


class StarSetModel(_Model):
    dim: int
    rho: RhoModel


class BodiesModel(_Model):
    bodies: List[StarSetModel]


class EntryModel(_Model):
    idx: List[int]
    w: float


class KernelModel(_Model):
    grid: GridRef
    entries: List[EntryModel]
    name: Optional[str] = None


class DiagonalModel(_Model):
    grid: GridRef
    weights: List[float]
    name: Optional[str] = None


FunctionalModel = Union[KernelModel, DiagonalModel]


def _validate(adapter_type: Any, data: Any, prefix: str = ""):
    try:
        return TypeAdapter(adapter_type).validate_python(data)
    except ValidationError as e:
        error = e.errors()[0]
        path = ".".join(str(part) for part in error["loc"])
        field = ".".join(p for p in (prefix, path) if p)
        raise DescriptorError(error["msg"], field=field) from e


def _convert(fn, field: str):
    """Run a conversion, attaching ``field`` to library errors."""
    try:
        return fn()
    except DescriptorError:
        raise
    except (DualVolError, ValueError) as e:
        raise DescriptorError(str(e), field=field) from e


def _grid_from_ref(ref: GridRef, field: str) -> SphereGrid:
    if isinstance(ref, str):
        spec = _convert(lambda: parse_grid_spec(ref), field)
    else:
        spec = {k: v for k, v in ref.model_dump().items() if v is not None}
    return _convert(lambda: make_grid(**spec), field)


def parse_grid(value: Union[str, dict]) -> SphereGrid:
    """Grid from ``"dim=2,m=64"`` or ``{"dim": 2, "m": 64}``."""
    ref = _validate(GridRef, value, "grid")
    return _grid_from_ref(ref, "grid")


def _region(model, dim: int, field: str) -> SphericalRegion:
    def build() -> SphericalRegion:
        if isinstance(model, FullModel):
            return FullSphere(dim)
        if isinstance(model, (ArcModel, ArcsModel)):
            if dim != 2:
                raise DimensionError(f"arcs exist only in dimension 2, not {dim}")
            if isinstance(model, ArcModel):
                return Arc(model.start, model.end)
            return ArcSet(tuple(model.intervals))
        if isinstance(model, CapModel):
            if len(model.center) != dim:
                raise DimensionError(
                    f"cap center has {len(model.center)} coordinates, expected {dim}"
                )
            return Cap(Direction(tuple(model.center)), model.radius)
        grid = _grid_from_ref(model.grid, f"{field}.grid")
        if grid.dim != dim:
            raise DimensionError(f"cell set on grid {grid.grid_id} used in dimension {dim}")
        return CellSet(grid.grid_id, frozenset(model.indices))

    return _convert(build, field)


def parse_region(data: dict, dim: int) -> SphericalRegion:
    return _region(_validate(RegionModel, data, "region"), dim, "region")


def _star_set(model: StarSetModel, field: str) -> StarSet:
    rho = model.rho
    if isinstance(rho, SimpleRhoModel):
        terms = [
            (term.alpha, _region(term.base, model.dim, f"{field}.rho.terms.{i}.base"))
            for i, term in enumerate(rho.terms)
        ]
        try:
            return canonicalize(terms, model.dim)
        except RequiresGridError:
            # overlapping caps outside n = 2 stay as given; grid or Monte Carlo paths handle them
            return _convert(
                lambda: StarSet(model.dim, SimpleRadial(model.dim, tuple(terms))), f"{field}.rho"
            )
        except (DualVolError, ValueError) as e:
            raise DescriptorError(str(e), field=f"{field}.rho") from e
    grid = _grid_from_ref(rho.grid, f"{field}.rho.grid")
    if grid.dim != model.dim:
        raise DescriptorError(
            f"grid {grid.grid_id} in a star set of dimension {model.dim}", field=f"{field}.rho.grid"
        )
    return _convert(
        lambda: StarSet(model.dim, GridRadial(grid, tuple(rho.values))), f"{field}.rho.values"
    )


def parse_star_set(data: dict) -> StarSet:
    return _star_set(_validate(StarSetModel, data, "body"), "body")


def _read_json(path: Union[str, Path]) -> Any:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DescriptorError(
            f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}", field=str(path)
        ) from e


def load_bodies(path: Union[str, Path]) -> List[StarSet]:
    """Star sets from a file holding a list, ``{"bodies": [...]}``, or a single descriptor."""
    data = _read_json(path)
    if isinstance(data, list):
        data = {"bodies": data}
    elif isinstance(data, dict) and "bodies" not in data:
        data = {"bodies": [data]}
    model = _validate(BodiesModel, data)
    return [_star_set(body, f"bodies.{i}") for i, body in enumerate(model.bodies)]


def functional_from_data(data: Any, grid: Optional[SphereGrid] = None) -> Functional:
    """Kernel (``entries``) or diagonal (``weights``) functional from a descriptor.

    Raises:
        GridMismatchError: If ``grid`` is given and differs from the descriptor's grid
    """
    model = _validate(FunctionalModel, data, "functional")
    own = _grid_from_ref(model.grid, "functional.grid")
    if grid is not None and grid != own:
        raise GridMismatchError(
            f"functional lives on {own.grid_id}, but {grid.grid_id} was requested"
        )
    if isinstance(model, KernelModel):
        weights = {}
        for i, entry in enumerate(model.entries):
            index = tuple(entry.idx)
            if index in weights:
                raise DescriptorError(
                    f"duplicate multi-index {list(index)}", field=f"functional.entries.{i}.idx"
                )
            weights[index] = entry.w
        name = model.name or "kernel"
        return _convert(lambda: KernelFunctional(own, weights, name=name), "functional.entries")
    name = model.name or "diagonal"
    return _convert(lambda: DiagonalFunctional(own, model.weights, name=name), "functional.weights")


def load_functional(path: Union[str, Path], grid: Optional[SphereGrid] = None) -> Functional:
    return functional_from_data(_read_json(path), grid)
