"""Valuation pipeline: ``μ(A) = F(st A,…,st A)`` on cell sets and its consequences for ``F``."""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from dualvol.characterize.diagnostics import estimate_constant
from dualvol.config import DEFAULT_TOLERANCE
from dualvol.core.mixed_volume import cone_product_identity, volume
from dualvol.core.sphere import CellSet, SphereGrid, grid_symmetries
from dualvol.core.starset import cone, star_hull
from dualvol.errors import RequiresGridError
from dualvol.functionals.base import Functional
from dualvol.functionals.checks import Verdict
from dualvol.functionals.sampling import random_cell_set, random_level, random_polycone
from dualvol.utils.logging import get_logger

logger = get_logger("dmv.valuation")

VOLUME_TRIALS = 50
CONE_TRIALS = 20


@dataclass
class ValuationReport:
    functional: Dict
    grid: str
    trials: int
    seed: int
    tolerance: float
    valuation_residual: float = 0.0
    empty_value: float = 0.0
    rotation_residual: Optional[float] = None
    lam: float = 0.0
    density: List[float] = field(default_factory=list)
    density_spread: float = 0.0
    c_from_density: float = 0.0
    c_estimate: Optional[float] = None
    c_consistency: Optional[float] = None
    volume_residual: Optional[float] = None
    cone_residual: float = 0.0
    checks: Dict[str, Verdict] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(v == Verdict.FAIL for v in self.checks.values())

    def density_profile(self, grid: SphereGrid) -> List[Tuple[int, float, float]]:
        """Rows ``(cell, density, σ-weight)``."""
        weights = grid.weights.tolist()
        return [(k, d, float(w)) for k, (d, w) in enumerate(zip(self.density, weights))]

    def to_dict(self) -> Dict:
        return {
            "functional": self.functional,
            "grid": self.grid,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "valuation_residual": self.valuation_residual,
            "empty_value": self.empty_value,
            "rotation_residual": self.rotation_residual,
            "lambda": self.lam,
            "density_spread": self.density_spread,
            "c_from_density": self.c_from_density,
            "c_estimate": self.c_estimate,
            "c_consistency": self.c_consistency,
            "volume_residual": self.volume_residual,
            "cone_residual": self.cone_residual,
            "checks": {name: verdict.value for name, verdict in self.checks.items()},
            "passed": self.passed,
        }


def _verdict(residual: float, tol: float) -> Verdict:
    return Verdict.PASS if residual <= tol else Verdict.FAIL


def valuation_pipeline(
    functional: Functional,
    grid: Optional[SphereGrid] = None,
    trials: int = 100,
    seed: int = 0,
    tol: float = DEFAULT_TOLERANCE
) -> ValuationReport:
    """Test the valuation induced by ``F`` on cell sets of ``grid``.

    Checks, in order: the valuation identity on random pairs, ``μ(∅) = 0``,
    invariance under grid symmetries, constant density ``μ(A_k)/σ(A_k) = λ``,
    ``F(L,…,L) = c·H^n(L)`` on random polycones with ``c`` estimated from ratios
    (and compared with ``n·λ``), and the cone-product identity with ``F``.
    """
    grid = grid or functional.grid
    if grid is None:
        raise RequiresGridError(f"the valuation pipeline for {functional.name} needs a grid")
    dim = grid.dim
    rng = np.random.default_rng(seed)
    report = ValuationReport(functional.describe(), grid.grid_id, trials, seed, tol)

    def mu(region: CellSet) -> float:
        return functional.evaluate([star_hull(region)] * dim)

    # valuation identity
    worst = 0.0
    for _ in range(trials):
        a, b = random_cell_set(grid, rng), random_cell_set(grid, rng)
        union = CellSet(grid.grid_id, a.indices | b.indices)
        meet = CellSet(grid.grid_id, a.indices & b.indices)
        values = [mu(union), mu(meet), mu(a), mu(b)]
        gap = abs(values[0] + values[1] - values[2] - values[3])
        worst = max(worst, gap / max([1.0] + [abs(v) for v in values]))
    report.valuation_residual = worst
    report.checks["valuation"] = _verdict(worst, tol)

    report.empty_value = mu(CellSet(grid.grid_id, frozenset()))
    report.checks["empty"] = _verdict(abs(report.empty_value), tol)

    symmetries = [s for s in grid_symmetries(grid) if not s.is_identity]
    if symmetries:
        worst = 0.0
        for trial in range(trials):
            symmetry = symmetries[trial % len(symmetries)]
            region = random_cell_set(grid, rng)
            before = mu(region)
            after = mu(CellSet(grid.grid_id, symmetry.apply_indices(region.indices)))
            worst = max(worst, abs(after - before) / max(1.0, abs(before), abs(after)))
        report.rotation_residual = worst
        report.checks["rotation"] = _verdict(worst, tol)
    else:
        report.checks["rotation"] = Verdict.INCONCLUSIVE

    density = np.array([mu(grid.cell_region(k)) for k in range(grid.size)]) / grid.weights
    report.density = density.tolist()
    report.lam = math.fsum(report.density) / grid.size
    report.density_spread = float(np.max(density) - np.min(density))
    report.checks["proportional"] = _verdict(report.density_spread, tol * abs(report.lam))
    report.c_from_density = dim * report.lam

    estimate = estimate_constant(
        functional, grid, trials=max(2, min(trials, VOLUME_TRIALS)), seed=seed, tol=tol
    )
    report.c_estimate = estimate.c
    report.c_consistency = abs(report.c_from_density - estimate.c) / max(1.0, abs(estimate.c))
    worst = 0.0
    for _ in range(min(trials, VOLUME_TRIALS)):
        body = random_polycone(grid, rng)
        value = functional.evaluate([body] * dim)
        expected = estimate.c * volume(body, grid=grid).value
        worst = max(worst, abs(value - expected) / max(1.0, abs(value), abs(expected)))
    report.volume_residual = worst
    report.checks["volume"] = _verdict(max(worst, report.c_consistency), tol)

    worst = 0.0
    for _ in range(min(trials, CONE_TRIALS)):
        cones = []
        for _ in range(dim):
            base = random_cell_set(grid, rng)
            if not base.indices:
                base = grid.cell_region(int(rng.integers(grid.size)))
            cones.append(cone(random_level(rng), base))
        check = cone_product_identity(cones, grid=grid, evaluator=functional.evaluate)
        worst = max(worst, check.ratio_residual / max(1.0, abs(check.direct)))
    report.cone_residual = worst
    report.checks["cone"] = _verdict(worst, tol)

    logger.info(f"Valuation pipeline for {functional.name}: lambda = {report.lam:.12g}, "
                f"c = {report.c_from_density:.12g}, passed = {report.passed}")
    return report
