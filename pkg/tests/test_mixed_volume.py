import itertools
import math

import numpy as np
import pytest

from dualvol.core.mixed_volume import (
    Method,
    cone_product_identity,
    dual_mixed_volume,
    lutwak_expand,
    mixed_volume_bound,
    monte_carlo_dmv,
    verify_lutwak,
    volume,
)
from dualvol.core.sphere import Arc, Cap, CellSet, Direction, FullSphere
from dualvol.core.starset import (
    SamplerRadial,
    StarSet,
    ball,
    cone,
    origin,
    radial_sum,
    unit_ball,
)
from dualvol.errors import ArityError, DimensionError, InvalidParameterError
from dualvol.functionals.sampling import (
    random_dense_polycone,
    random_level,
    random_polycone,
    random_tuple,
)


def test_two_half_cones(half_cones):
    result = dual_mixed_volume(half_cones)
    assert result.method == Method.EXACT
    assert result.value == pytest.approx(3 * math.pi / 2, rel=1e-14)
    assert result.error == 0.0


@pytest.mark.parametrize(
    "dim, expected", [(2, math.pi), (3, 4 * math.pi / 3), (4, math.pi ** 2 / 2)]
)
def test_unit_ball_volume(dim, expected):
    assert volume(unit_ball(dim)).value == pytest.approx(expected, rel=1e-14)


def test_volume_scales_with_power():
    assert volume(ball(3, 2.0)).value == pytest.approx(8 * 4 * math.pi / 3, rel=1e-14)


def test_hemisphere_cone_in_four_dimensions():
    body = cone(1.0, Cap(Direction((0.0, 0.0, 0.0, 1.0)), math.pi / 2))
    assert volume(body).value == pytest.approx(math.pi ** 2 / 4, rel=1e-12)


def test_origin_has_zero_volume():
    assert volume(origin(3)).value == 0.0


def test_arity_and_dimension_errors(half_cones):
    with pytest.raises(ArityError):
        dual_mixed_volume(half_cones + [unit_ball(2)])
    with pytest.raises(DimensionError):
        dual_mixed_volume([unit_ball(2), unit_ball(3)])


def test_grid_path_matches_refinement(circle_grid):
    bodies = [cone(2.0, circle_grid.cell_region(1)), cone(0.5, Arc(0.0, math.pi / 2))]
    exact = dual_mixed_volume(bodies)
    gridded = dual_mixed_volume(bodies, grid=circle_grid)
    assert gridded.value == pytest.approx(exact.value, rel=1e-14)
    assert exact.value == pytest.approx(0.5 * 2.0 * 0.5 * math.pi / 4, rel=1e-14)


def test_bound(half_cones):
    assert mixed_volume_bound(half_cones) == pytest.approx(math.pi * 6.0)
    assert dual_mixed_volume(half_cones).value <= mixed_volume_bound(half_cones)


def test_monte_carlo_constant_integrand_is_exact():
    result = dual_mixed_volume([unit_ball(3)] * 3, samples=20_000, seed=1)
    assert result.method == Method.MONTE_CARLO
    assert result.value == pytest.approx(4 * math.pi / 3, rel=1e-15)
    assert result.error == 0.0
    assert result.samples == 20_000


def test_monte_carlo_hemisphere():
    body = cone(1.0, Cap(Direction((0.0, 0.0, 1.0)), math.pi / 2))
    result = monte_carlo_dmv([body] * 3, 200_000, seed=7)
    assert abs(result.value - 2 * math.pi / 3) <= 5 * result.error
    again = monte_carlo_dmv([body] * 3, 200_000, seed=7)
    assert again.value == result.value


def test_monte_carlo_needs_seed():
    with pytest.raises(InvalidParameterError):
        monte_carlo_dmv([unit_ball(2)] * 2, 100, seed=None)
    with pytest.raises(InvalidParameterError):
        monte_carlo_dmv([unit_ball(2)] * 2, 0, seed=1)


def test_sampler_without_grid_uses_monte_carlo():
    body = StarSet(2, SamplerRadial(
        dim=2,
        fn=lambda u: 1.0,
        bound=1.0,
        continuous=True,
        many=lambda points: [1.0] * len(points),
    ))
    result = dual_mixed_volume([body, body], seed=3)
    assert result.method == Method.MONTE_CARLO
    assert result.value == pytest.approx(math.pi, rel=1e-15)


def test_sampler_on_grid_is_quadrature(circle_grid):
    rho = SamplerRadial(dim=2, fn=lambda u: 1.0 + 0.5 * u.coords[0], bound=1.5, continuous=True)
    body = StarSet(2, rho)
    result = dual_mixed_volume([body, unit_ball(2)], grid=circle_grid)
    assert result.method == Method.QUADRATURE
    assert math.isnan(result.error)
    # the cosine term sums to zero over symmetric representatives
    assert result.value == pytest.approx(math.pi, rel=1e-12)


def test_lutwak_expansion_is_symmetric(half_cones):
    expansion = lutwak_expand(half_cones)
    assert expansion.coefficients[(0, 1)] == expansion.coefficients[(1, 0)]
    assert expansion.coefficients[(0, 1)] == pytest.approx(3 * math.pi / 2)
    assert expansion.coefficients[(0, 0)] == pytest.approx(volume(half_cones[0]).value)
    symmetric = expansion.symmetric_form()
    assert symmetric[(0, 1)] == pytest.approx(3 * math.pi)
    data = expansion.to_dict()
    assert set(data["coefficients"]) == {"1,1", "1,2", "2,1", "2,2"}


@pytest.mark.parametrize("t", [(0.5, 2.0), (1.0, 1.0), (0.0, 3.0), (0.0, 0.0)])
def test_lutwak_identity(half_cones, t):
    check = verify_lutwak(half_cones, t)
    assert check.passed
    assert check.residual <= 1e-10 * max(1.0, abs(check.lhs))


def test_lutwak_zero_coefficients(half_cones):
    check = verify_lutwak(half_cones, (0.0, 0.0))
    assert check.lhs == 0.0
    assert check.rhs == 0.0


def test_lutwak_three_bodies_on_a_grid(sphere_grid):
    north = Cap(Direction((0.0, 0.0, 1.0)), math.pi / 2)
    bodies = [cone(1.0, north), ball(3, 0.5), cone(2.0, sphere_grid.cell_region(5))]
    check = verify_lutwak(bodies, (1.0, 2.0, 0.5), grid=sphere_grid)
    assert check.passed
    assert len(check.expansion.coefficients) == 27


def test_cone_product_identity(half_cones):
    check = cone_product_identity(half_cones)
    assert check.passed
    assert check.closed_form == pytest.approx(3 * math.pi / 2)
    assert check.ratio_form == pytest.approx(check.direct)


def test_cone_product_identity_in_three_dimensions(sphere_grid):
    cones = [cone(alpha, sphere_grid.cell_region(0)) for alpha in (1.0, 2.0, 3.0)]
    check = cone_product_identity(cones, grid=sphere_grid)
    assert check.passed
    assert check.direct == pytest.approx(6.0 / 3 * sphere_grid.weights[0])


def test_cone_product_identity_disjoint_bases():
    cones = [cone(1.0, Arc(0.0, 1.0)), cone(2.0, Arc(2.0, 3.0))]
    check = cone_product_identity(cones)
    assert check.direct == 0.0
    assert check.closed_form == 0.0
    assert check.passed


def test_full_sphere_cones():
    cones = [cone(2.0, FullSphere(2)), cone(3.0, FullSphere(2))]
    check = cone_product_identity(cones)
    assert check.direct == pytest.approx(6.0 * math.pi)
    assert check.passed


def test_monte_carlo_product_within_three_standard_errors():
    north = Cap(Direction((0.0, 0.0, 1.0)), math.pi / 2)
    bodies = [cone(1.0, north), cone(2.0, FullSphere(3)), ball(3, 0.5)]
    exact = dual_mixed_volume(bodies).value
    assert exact == pytest.approx(2 * math.pi / 3, rel=1e-12)
    result = monte_carlo_dmv(bodies, 1_000_000, seed=11)
    assert result.samples == 1_000_000
    assert 0.0 < result.error < 1e-2
    assert abs(result.value - exact) <= 3 * result.error


@pytest.mark.parametrize("grid_name", ["circle_grid", "sphere_grid"])
def test_lutwak_identity_on_random_polycones(request, grid_name, rng):
    grid = request.getfixturevalue(grid_name)
    for trial in range(50):
        make = random_dense_polycone if trial % 2 else random_polycone
        bodies = [make(grid, rng) for _ in range(3)]
        coefficients = [(1.0, 2.0, 3.0)]
        coefficients += [tuple(rng.uniform(0.0, 3.0, size=3).tolist()) for _ in range(5)]
        for t in coefficients:
            check = verify_lutwak(bodies, t, grid=grid)
            assert check.residual <= 1e-10 * max(1.0, abs(check.lhs))
            assert check.passed


def _random_cone_tuple(grid, rng):
    cones = []
    for _ in range(grid.dim):
        count = int(rng.integers(1, grid.size + 1))
        cells = frozenset(int(k) for k in rng.choice(grid.size, size=count, replace=False))
        cones.append(cone(random_level(rng), CellSet(grid.grid_id, cells)))
    return cones


@pytest.mark.parametrize("grid_name", ["circle_grid", "sphere_grid"])
def test_cone_product_identity_on_random_cells(request, grid_name, rng):
    grid = request.getfixturevalue(grid_name)
    for _ in range(50):
        check = cone_product_identity(_random_cone_tuple(grid, rng), grid=grid)
        scale_ref = max(1.0, abs(check.direct))
        assert check.closed_residual <= 1e-12 * scale_ref
        assert check.ratio_residual <= 1e-12 * scale_ref
        assert check.passed


def test_cone_product_identity_on_random_arcs(rng):
    for _ in range(50):
        cones = []
        for _ in range(2):
            start, end = sorted(rng.uniform(0.0, 2 * math.pi, size=2).tolist())
            cones.append(cone(random_level(rng), Arc(start, end)))
        check = cone_product_identity(cones)
        assert check.passed


def test_dual_mixed_volume_is_symmetric(sphere_grid, rng):
    for trial in range(20):
        bodies = random_tuple(sphere_grid, rng, dense=trial % 2 == 0)
        reference = dual_mixed_volume(bodies, grid=sphere_grid).value
        for order in itertools.permutations(bodies):
            value = dual_mixed_volume(list(order), grid=sphere_grid).value
            assert value == pytest.approx(reference, rel=1e-14)


def test_dual_mixed_volume_is_increasing(circle_grid, rng):
    for trial in range(50):
        smaller = random_tuple(circle_grid, rng, dense=trial % 2 == 0)
        larger = [radial_sum(body, random_polycone(circle_grid, rng)) for body in smaller]
        low = dual_mixed_volume(smaller, grid=circle_grid).value
        high = dual_mixed_volume(larger, grid=circle_grid).value
        assert low <= high * (1 + 1e-14)
        assert np.all(np.isfinite([low, high]))
