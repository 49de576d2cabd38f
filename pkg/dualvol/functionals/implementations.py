"""Kernel, diagonal and black-box functionals, and their signed extensions.

A signed grid function is a float array with one entry per grid cell. Kernel
functionals extend to signed functions by plain contraction; the expansion over
positive and negative parts gives the same number.
"""
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from dualvol.core.mixed_volume import dual_mixed_volume
from dualvol.core.sphere import SphereGrid
from dualvol.core.starset import StarSet, grid_values
from dualvol.errors import ArityError, DomainError, GridMismatchError
from dualvol.functionals.base import Functional

MultiIndex = Tuple[int, ...]


def _as_signed(grid: SphereGrid, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.size,):
        raise GridMismatchError(
            f"grid function of shape {f.shape} on grid {grid.grid_id} ({grid.size} cells)"
        )
    if not np.all(np.isfinite(f)):
        raise DomainError("grid functions must be finite")
    return f


class KernelFunctional(Functional):
    """``F(f₁,…,fₙ) = Σ_k μ[k]·Π_i f_i[k_i]`` for a sparse weight map on cell multi-indices."""

    def __init__(
        self,
        grid: SphereGrid,
        weights: Mapping[MultiIndex, float],
        allow_signed: bool = False,
        name: str = "kernel",
        description: str = ""
    ):
        """Initialize kernel functional.

        Args:
            grid: Grid whose cells index the weights
            weights: Map from n-tuples of cell indices to weights (zeros are dropped)
            allow_signed: Accept negative weights (recovered or constructed test kernels)
            name: Functional name
            description: Human-readable description
        """
        super().__init__(name, grid.dim, grid, description)
        entries: Dict[MultiIndex, float] = {}
        for index, weight in weights.items():
            index = tuple(int(k) for k in index)
            weight = float(weight)
            if len(index) != self.dim:
                raise ArityError(
                    f"multi-index {index} has length {len(index)}, expected {self.dim}"
                )
            if any(not 0 <= k < grid.size for k in index):
                raise DomainError(f"multi-index {index} out of range for grid {grid.grid_id}")
            if not math.isfinite(weight):
                raise DomainError(f"weight at {index} is not finite")
            if weight < 0.0 and not allow_signed:
                raise DomainError(f"negative weight {weight} at {index}")
            if weight != 0.0:
                entries[index] = entries.get(index, 0.0) + weight
        ordered = sorted(entries.items())
        self.indices = np.array([k for k, _ in ordered], dtype=int).reshape(len(ordered), self.dim)
        self.values = np.array([w for _, w in ordered], dtype=float)

    @property
    def weights(self) -> Dict[MultiIndex, float]:
        return {
            tuple(int(k) for k in index): float(w)
            for index, w in zip(self.indices, self.values)
        }

    @property
    def total_mass(self) -> float:
        return math.fsum(self.values.tolist())

    @property
    def variation(self) -> float:
        """Total mass of ``|μ|``."""
        return math.fsum(np.abs(self.values).tolist())

    @property
    def negative_mass(self) -> float:
        return math.fsum((-self.values[self.values < 0.0]).tolist())

    def contract(self, functions: Sequence[np.ndarray]) -> float:
        """Contract the weights against n signed grid functions."""
        if len(functions) != self.dim:
            raise ArityError(f"{self.name} takes {self.dim} functions, got {len(functions)}")
        terms = self.values.copy()
        for slot, f in enumerate(functions):
            terms *= _as_signed(self.grid, f)[self.indices[:, slot]]
        return math.fsum(terms.tolist())

    def evaluate(self, bodies: Sequence[StarSet]) -> float:
        bodies = self.check_arity(bodies)
        return self.contract([grid_values(body, self.grid) for body in bodies])

    def to_descriptor(self) -> Dict:
        return {
            "grid": self.grid.to_descriptor(),
            "entries": [{"idx": list(index), "w": w} for index, w in sorted(self.weights.items())],
        }


class DiagonalFunctional(Functional):
    """``F(f₁,…,fₙ) = Σ_k w_k·Π_i f_i[k]``, a measure on the diagonal."""

    def __init__(
        self,
        grid: SphereGrid,
        weights: Sequence[float],
        allow_signed: bool = False,
        name: str = "diagonal",
        description: str = ""
    ):
        super().__init__(name, grid.dim, grid, description)
        values = np.asarray(weights, dtype=float)
        if values.shape != (grid.size,):
            raise GridMismatchError(
                f"{len(values)} weights for grid {grid.grid_id} ({grid.size} cells)"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("diagonal weights must be finite")
        if not allow_signed and np.any(values < 0.0):
            raise DomainError(f"negative diagonal weight at cell {int(np.argmin(values))}")
        values.setflags(write=False)
        self.weights = values

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights.tolist())

    @property
    def variation(self) -> float:
        return math.fsum(np.abs(self.weights).tolist())

    @property
    def negative_mass(self) -> float:
        return math.fsum((-self.weights[self.weights < 0.0]).tolist())

    @property
    def density(self) -> np.ndarray:
        """``w_k / σ(cell k)``."""
        return self.weights / self.grid.weights

    def contract(self, functions: Sequence[np.ndarray]) -> float:
        if len(functions) != self.dim:
            raise ArityError(f"{self.name} takes {self.dim} functions, got {len(functions)}")
        terms = np.array(self.weights, dtype=float)
        for f in functions:
            terms = terms * _as_signed(self.grid, f)
        return math.fsum(terms.tolist())

    def evaluate(self, bodies: Sequence[StarSet]) -> float:
        bodies = self.check_arity(bodies)
        return self.contract([grid_values(body, self.grid) for body in bodies])

    def as_kernel(self) -> KernelFunctional:
        return KernelFunctional(
            self.grid,
            {(k,) * self.dim: w for k, w in enumerate(self.weights.tolist()) if w != 0.0},
            allow_signed=True,
            name=self.name,
            description=self.description,
        )

    def to_descriptor(self) -> Dict:
        return {"grid": self.grid.to_descriptor(), "weights": self.weights.tolist()}


class BlackBoxFunctional(Functional):
    """A functional known only through evaluation."""

    def __init__(
        self,
        name: str,
        dim: int,
        evaluator: Callable[[List[StarSet]], float],
        grid: Optional[SphereGrid] = None,
        description: str = "",
        serial: bool = False
    ):
        super().__init__(name, dim, grid, description, serial)
        self.evaluator = evaluator

    def evaluate(self, bodies: Sequence[StarSet]) -> float:
        return float(self.evaluator(self.check_arity(bodies)))


ContractingFunctional = Union[KernelFunctional, DiagonalFunctional]


def mixed_volume_kernel(grid: SphereGrid, c: float = 1.0) -> DiagonalFunctional:
    """Diagonal functional with ``w_k = c·σ(cell k)/n``, equal to ``c·Ṽ`` on grid star sets."""
    if c < 0.0:
        raise DomainError(f"constant must be nonnegative, got {c}")
    weights = c * np.asarray(grid.weights) / grid.dim
    return DiagonalFunctional(grid, weights, name=f"{c:g}*dmv-kernel")


def mixed_volume_functional(
    dim: int, c: float = 1.0, grid: Optional[SphereGrid] = None
) -> BlackBoxFunctional:
    """``c·Ṽ`` evaluated by the exact engine."""
    name = "dmv" if c == 1.0 else f"{c:g}*dmv"

    def evaluator(bodies: List[StarSet]) -> float:
        return c * dual_mixed_volume(bodies, grid=grid).value

    return BlackBoxFunctional(
        name, dim, evaluator, grid, description="constant multiple of the dual mixed volume"
    )


def negated(functional: Functional) -> BlackBoxFunctional:
    """``-F``."""
    return BlackBoxFunctional(
        f"-{functional.name}",
        functional.dim,
        lambda bodies: -functional.evaluate(bodies),
        functional.grid,
        serial=functional.serial,
    )


def positive_part(f: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(f, dtype=float), 0.0)


def negative_part(f: np.ndarray) -> np.ndarray:
    return np.maximum(-np.asarray(f, dtype=float), 0.0)


def signed_expansion(functional: ContractingFunctional, functions: Sequence[np.ndarray]) -> float:
    """``Σ_{r ∈ {0,1}^n} (-1)^{|r|} F(f₁^{r₁},…,fₙ^{rₙ})`` with ``f^0 = f⁺`` and ``f^1 = f⁻``.

    Only nonnegative arguments reach the functional.
    """
    parts = [(positive_part(f), negative_part(f)) for f in functions]
    terms = []
    for signs in itertools.product((0, 1), repeat=len(functions)):
        value = functional.contract([parts[i][r] for i, r in enumerate(signs)])
        terms.append(-value if sum(signs) % 2 else value)
    return math.fsum(terms)


def extend_signed(
    functional: ContractingFunctional,
    functions: Sequence[np.ndarray],
    method: str = "direct"
) -> float:
    """Extension of ``F`` to signed grid functions.

    Args:
        functional: Kernel or diagonal functional
        functions: n signed grid functions
        method: ``direct`` (contraction) or ``expansion`` (positive/negative parts)
    """
    if method == "direct":
        return functional.contract(functions)
    if method == "expansion":
        return signed_expansion(functional, functions)
    raise ValueError(f"unknown extension method: {method}")


def operator_norm_bound(functional: ContractingFunctional) -> float:
    """``M`` with ``|F(f₁,…,fₙ)| ≤ M·Π‖f_i‖∞``.

    Nonnegative kernels give their total mass. Signed kernels (recovered or built
    with ``allow_signed``) give the total variation ``Σ|μ_k|``, since the total mass
    can cancel to zero while ``F`` does not vanish.
    """
    if functional.negative_mass == 0.0:
        return functional.total_mass
    return functional.variation


def telescoping_gap(
    functional: ContractingFunctional,
    v: Sequence[np.ndarray],
    w: Sequence[np.ndarray]
) -> float:
    """``|F(v) - F(w) - Σ_i F(w₁,…,w_{i-1}, v_i - w_i, v_{i+1},…,vₙ)|``."""
    if len(v) != len(w):
        raise ArityError("telescoping needs two tuples of equal length")
    lhs = functional.contract(v) - functional.contract(w)
    pieces = []
    for i in range(len(v)):
        args = list(w[:i]) + [np.asarray(v[i]) - np.asarray(w[i])] + list(v[i + 1:])
        pieces.append(functional.contract(args))
    return abs(lhs - math.fsum(pieces))


@dataclass(frozen=True)
class Domination:
    """``|F(f)|`` against its dominating value."""
    value: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.value <= self.bound + 1e-12 * max(1.0, abs(self.bound))


def absolute_domination(
    functional: ContractingFunctional,
    functions: Sequence[np.ndarray],
    slot: Optional[int] = None
) -> Domination:
    """Compare ``|F(f)|`` with ``F(|f₁|,…,|fₙ|)``, or with ``F(…,|f_slot|,…)`` for a given ``slot``.

    Raises:
        DomainError: If ``slot`` is given and another argument takes negative values
    """
    functions = [np.asarray(f, dtype=float) for f in functions]
    value = abs(functional.contract(functions))
    if slot is None:
        return Domination(value, functional.contract([np.abs(f) for f in functions]))
    for i, f in enumerate(functions):
        if i != slot and np.any(f < 0.0):
            raise DomainError(f"argument {i} must be nonnegative when dominating slot {slot}")
    dominated = list(functions)
    dominated[slot] = np.abs(functions[slot])
    return Domination(value, functional.contract(dominated))
