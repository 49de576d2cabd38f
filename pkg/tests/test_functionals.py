import math

import numpy as np
import pytest

from dualvol.core.mixed_volume import dual_mixed_volume
from dualvol.core.sphere import make_grid
from dualvol.core.starset import cone
from dualvol.errors import ArityError, DomainError
from dualvol.functionals.auditor import PropertyAuditor
from dualvol.functionals.checks import (
    Verdict,
    check_additive,
    check_homogeneous,
    check_increasing,
    check_positive,
    check_rotation_invariant,
    check_vanishing,
)
from dualvol.functionals.implementations import (
    BlackBoxFunctional,
    DiagonalFunctional,
    KernelFunctional,
    absolute_domination,
    extend_signed,
    mixed_volume_functional,
    mixed_volume_kernel,
    negated,
    operator_norm_bound,
    signed_expansion,
    telescoping_gap,
)
from dualvol.functionals.sampling import random_kernel_weights, random_signed_function, random_tuple


def test_kernel_rejects_negative_weights(circle_grid):
    with pytest.raises(DomainError):
        KernelFunctional(circle_grid, {(0, 1): -1.0})
    kernel = KernelFunctional(circle_grid, {(0, 1): -1.0}, allow_signed=True)
    assert kernel.negative_mass == 1.0
    with pytest.raises(ArityError):
        KernelFunctional(circle_grid, {(0, 1, 2): 1.0})
    with pytest.raises(DomainError):
        KernelFunctional(circle_grid, {(0, 8): 1.0})


def test_kernel_evaluates_products(circle_grid):
    kernel = KernelFunctional(circle_grid, {(0, 1): 2.0, (3, 3): 0.5})
    a = cone(3.0, circle_grid.cell_region(0))
    b = cone(4.0, circle_grid.cell_region(1))
    assert kernel(a, b) == 24.0
    assert kernel(b, a) == 0.0
    assert kernel.total_mass == 2.5


def test_mixed_volume_kernel_matches_engine(circle_grid, rng):
    kernel = mixed_volume_kernel(circle_grid, 1.0)
    for trial in range(20):
        bodies = random_tuple(circle_grid, rng, dense=trial % 2 == 0)
        assert kernel.evaluate(bodies) == pytest.approx(dual_mixed_volume(bodies).value, rel=1e-12)


def test_diagonal_as_kernel(circle_grid, rng):
    diagonal = DiagonalFunctional(circle_grid, rng.uniform(0.1, 1.0, circle_grid.size))
    kernel = diagonal.as_kernel()
    for _ in range(100):
        f = [random_signed_function(circle_grid, rng) for _ in range(2)]
        assert kernel.contract(f) == pytest.approx(diagonal.contract(f), rel=1e-12)
    assert not diagonal.weights.flags.writeable


def test_signed_extension_methods_agree(sphere_grid, rng):
    kernel = KernelFunctional(sphere_grid, random_kernel_weights(sphere_grid, rng, entries=30))
    for _ in range(100):
        f = [random_signed_function(sphere_grid, rng) for _ in range(3)]
        direct = extend_signed(kernel, f)
        expanded = extend_signed(kernel, f, method="expansion")
        assert expanded == pytest.approx(direct, rel=1e-12, abs=1e-12)
    with pytest.raises(ValueError):
        extend_signed(kernel, f, method="other")


def test_signed_expansion_on_nonnegative_input(circle_grid, rng):
    kernel = KernelFunctional(circle_grid, random_kernel_weights(circle_grid, rng))
    f = [np.abs(random_signed_function(circle_grid, rng)) for _ in range(2)]
    assert signed_expansion(kernel, f) == pytest.approx(kernel.contract(f), rel=1e-14)


def test_telescoping_identity(sphere_grid, rng):
    kernel = KernelFunctional(sphere_grid, random_kernel_weights(sphere_grid, rng, entries=20))
    for _ in range(100):
        v = [random_signed_function(sphere_grid, rng) for _ in range(3)]
        w = [random_signed_function(sphere_grid, rng) for _ in range(3)]
        assert telescoping_gap(kernel, v, w) <= 1e-12 * max(1.0, kernel.variation * 8)


def test_domination_and_norm_bound(circle_grid, rng):
    kernel = KernelFunctional(circle_grid, random_kernel_weights(circle_grid, rng, entries=12))
    bound = operator_norm_bound(kernel)
    assert bound == pytest.approx(kernel.total_mass)
    for _ in range(100):
        f = [random_signed_function(circle_grid, rng) for _ in range(2)]
        assert absolute_domination(kernel, f).holds
        sup = math.prod(float(np.max(np.abs(g))) for g in f)
        assert abs(kernel.contract(f)) <= bound * sup * (1 + 1e-12)
        positive = [f[0], np.abs(f[1])]
        assert absolute_domination(kernel, positive, slot=0).holds
    with pytest.raises(DomainError):
        absolute_domination(kernel, [np.ones(8), -np.ones(8)], slot=0)


def test_norm_bound_of_signed_kernels(circle_grid):
    kernel = KernelFunctional(circle_grid, {(0, 0): 1.0, (1, 1): -1.0}, allow_signed=True)
    assert kernel.total_mass == 0.0
    assert operator_norm_bound(kernel) == kernel.variation == 2.0
    f = np.zeros(8)
    f[0] = 1.0
    assert kernel.contract([f, f]) == 1.0
    g = np.array([1.0, -1.0] + [0.0] * 6)
    assert abs(kernel.contract([g, g])) <= operator_norm_bound(kernel)
    diagonal = DiagonalFunctional(circle_grid, [1.0, -0.5] + [0.0] * 6, allow_signed=True)
    assert operator_norm_bound(diagonal) == 1.5
    assert operator_norm_bound(mixed_volume_kernel(circle_grid)) == pytest.approx(math.pi)


def test_mixed_volume_passes_every_check(circle_grid):
    functional = mixed_volume_functional(2, 1.5, circle_grid)
    for check in (check_additive, check_positive, check_increasing, check_homogeneous,
                  check_vanishing, check_rotation_invariant):
        report = check(functional, trials=20, seed=4)
        assert report.verdict == Verdict.PASS, report.to_dict()
        assert report.max_residual <= 1e-9


def test_mixed_volume_in_three_dimensions(sphere_grid):
    functional = mixed_volume_functional(3, 1.0, sphere_grid)
    for check in (check_additive, check_vanishing, check_rotation_invariant):
        assert check(functional, trials=10, seed=2).passed


def test_negated_fails_positivity(circle_grid):
    functional = negated(mixed_volume_functional(2, 1.0, circle_grid))
    report = check_positive(functional, trials=10, seed=1)
    assert report.failed
    assert report.witness["value"] < 0.0
    assert report.witness_inputs
    assert check_increasing(functional, trials=10, seed=1).failed


def test_checks_are_reproducible(circle_grid):
    functional = mixed_volume_functional(2, 1.0, circle_grid)
    first = check_additive(functional, trials=5, seed=9)
    second = check_additive(functional, trials=5, seed=9)
    assert first.to_dict() == second.to_dict()


def test_auditor_reports_unknown_and_broken_checks(circle_grid):
    def broken(bodies):
        raise RuntimeError("boom")

    auditor = PropertyAuditor(BlackBoxFunctional("broken", 2, broken, circle_grid), trials=3)
    report = auditor.run_check("additive")
    assert report.failed
    assert "boom" in report.note
    missing = auditor.run_check("nonsense")
    assert missing.failed
    assert "Check not found" in missing.note


def test_auditor_summary(circle_grid):
    auditor = PropertyAuditor(mixed_volume_functional(2, 1.0, circle_grid), trials=5, seed=1)
    summary = auditor.summary(auditor.run())
    assert summary["passed"]
    names = [r["name"] for r in summary["reports"]]
    assert names == ["additive", "positive", "homogeneous", "vanishing", "rotation"]
    assert "increasing" in PropertyAuditor.available_checks()


def test_rotation_inconclusive_without_symmetries():
    grid = make_grid(2, m=1)
    report = check_rotation_invariant(mixed_volume_functional(2, 1.0, grid), trials=3)
    assert report.verdict == Verdict.INCONCLUSIVE
