"""Dual mixed volumes, volumes, the Lutwak polynomial and the cone-product identity."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from dualvol.config import DEFAULT_MC_SAMPLES
from dualvol.core.refinement import common_refinement
from dualvol.core.sphere import SphereGrid, surface_measure
from dualvol.core.starset import (
    SamplerRadial,
    SimpleRadial,
    StarSet,
    polycone_intersect,
    radial_sum,
    scale,
)
from dualvol.engines import monte_carlo
from dualvol.engines.exact import tabulate
from dualvol.errors import ArityError, DimensionError, DomainError, InvalidParameterError
from dualvol.utils.logging import get_logger

logger = get_logger("dmv.volume")


class Method(str, Enum):
    EXACT = "exact"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class Volume:
    """A computed (dual mixed) volume.

    ``error`` is 0 for exact results, the standard error for Monte Carlo, and NaN
    (not estimated) for quadrature of samplers.
    """
    value: float
    method: Method
    error: float = 0.0
    samples: Optional[int] = None

    def to_dict(self) -> Dict:
        result = {"value": self.value, "method": self.method.value, "error": self.error}
        if self.samples is not None:
            result["samples"] = self.samples
        return result


def _check_arity(bodies: Sequence[StarSet]) -> int:
    if not bodies:
        raise ArityError("dual mixed volume needs n arguments, got none")
    dims = {body.dim for body in bodies}
    if len(dims) != 1:
        raise DimensionError(f"arguments of different dimensions: {sorted(dims)}")
    dim = dims.pop()
    if len(bodies) != dim:
        raise ArityError(
            f"dual mixed volume in dimension {dim} needs {dim} arguments, got {len(bodies)}"
        )
    return dim


def monte_carlo_dmv(bodies: Sequence[StarSet], samples: int, seed: Optional[int]) -> Volume:
    """Monte Carlo estimate ``σ/(nN) Σ_j Π_i ρ_i(u_j)`` with its standard error.

    Raises:
        InvalidParameterError: If ``samples < 1`` or no seed is given
    """
    dim = _check_arity(bodies)
    if samples is None or samples < 1:
        raise InvalidParameterError(f"samples must be >= 1, got {samples}")
    if seed is None:
        raise InvalidParameterError("Monte Carlo estimation needs an explicit seed")
    factor = surface_measure(dim) / dim
    mean, stderr = monte_carlo.mean_and_stderr(monte_carlo.product_samples(bodies, samples, seed))
    logger.debug(
        f"MC dual mixed volume with {samples} samples: {factor * mean:.6g} ± {factor * stderr:.3g}"
    )
    return Volume(factor * mean, Method.MONTE_CARLO, factor * stderr, samples)


def dual_mixed_volume(
    bodies: Sequence[StarSet],
    *,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    grid: Optional[SphereGrid] = None
) -> Volume:
    """``Ṽ(L₁,…,Lₙ) = (1/n) ∫ ρ_{L₁}⋯ρ_{Lₙ} du``.

    Simple and grid-sampled inputs are integrated exactly on their common refinement.
    Samplers use Monte Carlo unless a grid is given, in which case they are read at
    the cell representatives.

    Args:
        bodies: Exactly n star sets of dimension n
        samples: Force Monte Carlo with this many directions
        seed: Seed for Monte Carlo (required on that path)
        grid: Shared grid for grid-backed evaluation

    Raises:
        ArityError: If the argument count is not n
        RequiresGridError: If simple regions cannot be refined exactly
    """
    bodies = list(bodies)
    dim = _check_arity(bodies)
    if samples is not None:
        return monte_carlo_dmv(bodies, samples, seed)
    if grid is None and any(isinstance(b.rho, SamplerRadial) for b in bodies):
        return monte_carlo_dmv(bodies, DEFAULT_MC_SAMPLES, seed)
    table = tabulate(bodies, grid)
    value = table.product_integral() / dim
    if table.method == Method.EXACT.value:
        return Volume(value, Method.EXACT)
    return Volume(value, Method.QUADRATURE, math.nan)


def volume(body: StarSet, **kwargs) -> Volume:
    """``H^n(L) = Ṽ(L,…,L)``."""
    return dual_mixed_volume([body] * body.dim, **kwargs)


def mixed_volume_bound(bodies: Sequence[StarSet]) -> float:
    """Upper bound ``σ/n · Π ‖ρ_i‖∞`` for ``Ṽ(L₁,…,Lₙ)``."""
    dim = _check_arity(bodies)
    return surface_measure(dim) / dim * math.prod(b.rho.sup_norm() for b in bodies)


@dataclass
class LutwakExpansion:
    """Coefficients ``Ṽ(L_{i₁},…,L_{iₙ})`` of ``H^n(t₁L₁ +̃ ⋯ +̃ t_mL_m)``, one per ordered
    multi-index.

    Indices are 0-based; ``to_dict`` reports them 1-based.
    """
    m: int
    dim: int
    coefficients: Dict[Tuple[int, ...], float] = field(default_factory=dict)

    def evaluate(self, t: Sequence[float]) -> float:
        if len(t) != self.m:
            raise ArityError(f"expansion has {self.m} variables, got {len(t)}")
        return math.fsum(
            coefficient * math.prod(t[i] for i in index)
            for index, coefficient in sorted(self.coefficients.items())
        )

    def symmetric_form(self) -> Dict[Tuple[int, ...], float]:
        """One coefficient per sorted multi-index, times its multinomial count."""
        collapsed: Dict[Tuple[int, ...], float] = {}
        for index in itertools.combinations_with_replacement(range(self.m), self.dim):
            counts = Counter(index)
            multiplicity = math.factorial(self.dim)
            for c in counts.values():
                multiplicity //= math.factorial(c)
            collapsed[index] = multiplicity * self.coefficients[index]
        return collapsed

    def to_dict(self) -> Dict:
        return {
            "m": self.m,
            "dim": self.dim,
            "coefficients": {
                ",".join(str(i + 1) for i in index): value
                for index, value in sorted(self.coefficients.items())
            },
            "symmetric": {
                ",".join(str(i + 1) for i in index): value
                for index, value in sorted(self.symmetric_form().items())
            },
        }


def lutwak_expand(bodies: Sequence[StarSet], grid: Optional[SphereGrid] = None) -> LutwakExpansion:
    """Expand ``H^n(Σ̃ t_i L_i)`` as a homogeneous polynomial in ``t``.

    Each multiset of indices is integrated once and its value shared by all its
    orderings, so the coefficients are exactly symmetric.
    """
    bodies = list(bodies)
    if not bodies:
        raise ArityError("lutwak expansion needs at least one star set")
    dims = {b.dim for b in bodies}
    if len(dims) != 1:
        raise DimensionError(f"star sets of different dimensions: {sorted(dims)}")
    dim = dims.pop()
    table = tabulate(bodies, grid)
    expansion = LutwakExpansion(m=len(bodies), dim=dim)
    for combo in itertools.combinations_with_replacement(range(len(bodies)), dim):
        value = table.product_integral(combo) / dim
        for index in set(itertools.permutations(combo)):
            expansion.coefficients[index] = value
    return expansion


@dataclass
class LutwakCheck:
    lhs: float
    rhs: float
    residual: float
    passed: bool
    expansion: LutwakExpansion

    def to_dict(self) -> Dict:
        return {
            "coefficients": self.expansion.to_dict()["coefficients"],
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "passed": self.passed,
        }


def verify_lutwak(
    bodies: Sequence[StarSet],
    t: Sequence[float],
    grid: Optional[SphereGrid] = None,
    tol: float = 1e-10
) -> LutwakCheck:
    """Compare ``H^n(t₁L₁ +̃ ⋯ +̃ t_mL_m)`` computed directly with the polynomial value.

    Raises:
        DomainError: If some ``t_i < 0``
    """
    bodies = list(bodies)
    t = [float(x) for x in t]
    if len(t) != len(bodies):
        raise ArityError(f"{len(bodies)} star sets but {len(t)} coefficients")
    if any(x < 0.0 or not math.isfinite(x) for x in t):
        raise DomainError(f"coefficients must be nonnegative, got {t}")
    expansion = lutwak_expand(bodies, grid)
    combined = radial_sum(*(scale(ti, body) for ti, body in zip(t, bodies)), grid=grid)
    lhs = volume(combined, grid=grid).value
    rhs = expansion.evaluate(t)
    residual = abs(lhs - rhs)
    return LutwakCheck(lhs, rhs, residual, residual <= tol * max(1.0, abs(lhs)), expansion)


@dataclass
class ConeIdentityCheck:
    """Both sides of the cone-product identity.

    ``closed_form`` is ``(Πα/n)·σ(∩A)``, defined for the dual mixed volume only.
    ``ratio_form`` is ``(Πα / min α^n)·F(L,…,L)`` with ``L = ∩C_i``.
    """
    direct: float
    ratio_form: float
    ratio_residual: float
    closed_form: Optional[float] = None
    closed_residual: Optional[float] = None
    passed: bool = True

    def to_dict(self) -> Dict:
        return {
            "direct": self.direct,
            "closed_form": self.closed_form,
            "closed_residual": self.closed_residual,
            "ratio_form": self.ratio_form,
            "ratio_residual": self.ratio_residual,
            "passed": self.passed,
        }


def cone_product_identity(
    cones: Sequence[StarSet],
    grid: Optional[SphereGrid] = None,
    evaluator: Optional[Callable[[List[StarSet]], float]] = None,
    tol: float = 1e-12
) -> ConeIdentityCheck:
    """Check the cone-product identity for ``C_i = α_i st A_i``.

    Args:
        cones: n single cones of dimension n
        grid: Grid for refining grid-backed bases
        evaluator: Functional to test in place of the dual mixed volume
        tol: Relative tolerance on each residual

    Raises:
        DomainError: If an argument is not a single cone
    """
    cones = list(cones)
    dim = _check_arity(cones)
    alphas, bases = [], []
    for c in cones:
        if not isinstance(c.rho, SimpleRadial) or len(c.rho.terms) != 1:
            raise DomainError("cone-product identity needs single cones α·st(A)")
        alpha, base = c.rho.terms[0]
        if alpha <= 0.0:
            raise DomainError(f"cone radius must be positive, got {alpha}")
        alphas.append(alpha)
        bases.append(base)

    def measure(bodies: List[StarSet]) -> float:
        if evaluator is not None:
            return float(evaluator(bodies))
        return dual_mixed_volume(bodies, grid=grid).value

    direct = measure(cones)
    meet = polycone_intersect(*cones, grid=grid)
    ratio_form = math.prod(alphas) / min(alphas) ** dim * measure([meet] * dim)
    scale_ref = max(1.0, abs(direct))
    ratio_residual = abs(direct - ratio_form)
    passed = ratio_residual <= tol * scale_ref

    closed_form = closed_residual = None
    if evaluator is None:
        refinement = common_refinement(bases, dim, grid)
        inside = np.all(refinement.membership, axis=0)
        shared_measure = math.fsum(refinement.measures[inside].tolist())
        closed_form = math.prod(alphas) / dim * shared_measure
        closed_residual = abs(direct - closed_form)
        passed = passed and closed_residual <= tol * scale_ref
    return ConeIdentityCheck(
        direct, ratio_form, ratio_residual, closed_form, closed_residual, passed
    )
