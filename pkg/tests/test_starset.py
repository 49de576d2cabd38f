import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualvol.core.sphere import Arc, Cap, Direction, FullSphere, Rotation, make_grid, region_measure
from dualvol.core.starset import (
    GridRadial,
    Polycone,
    SamplerRadial,
    StarSet,
    ball,
    canonicalize,
    cone,
    grid_values,
    is_subset,
    origin,
    polycone_intersect,
    polycone_union,
    radial_eval,
    radial_sum,
    rotate_starset,
    scale,
    star_hull,
    to_grid,
)
from dualvol.errors import (
    DomainError,
    GridMismatchError,
    RequiresGridError,
    UnsupportedRotationError,
)

GRID = make_grid(2, m=8)
DYADIC = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0]


def at(body, theta):
    return radial_eval(body, Direction.from_angle(theta))


def test_cone_needs_positive_radius():
    with pytest.raises(DomainError):
        cone(0.0, Arc(0.0, 1.0))
    with pytest.raises(DomainError):
        cone(-1.0, Arc(0.0, 1.0))


def test_ball_and_origin():
    assert at(ball(2, 2.0), 1.234) == 2.0
    assert at(origin(2), 1.234) == 0.0
    assert ball(3).is_body
    assert not star_hull(Arc(0.0, 1.0)).is_body


def test_radial_eval_rejects_non_unit():
    with pytest.raises(DomainError):
        radial_eval(ball(2), (1.0, 1.0))


def test_canonicalize_overlapping_arcs():
    body = canonicalize([(1.0, Arc(0.0, math.pi)), (2.0, Arc(math.pi / 2, 3 * math.pi / 2))])
    assert isinstance(body, Polycone)
    assert at(body, math.pi / 4) == 1.0
    assert at(body, 3 * math.pi / 4) == 2.0
    assert at(body, 5 * math.pi / 4) == 2.0
    assert at(body, 7 * math.pi / 4) == 0.0
    levels = [level for level, _ in body.terms]
    assert levels == sorted(set(levels))
    covered = math.fsum(region_measure(region) for _, region in body.terms)
    assert covered == pytest.approx(3 * math.pi / 2)


def test_canonicalize_drops_zero_terms():
    body = canonicalize([(0.0, Arc(0.0, 1.0)), (1.0, Arc(1.0, 2.0)), (1.0, Arc(1.0, 2.0))])
    assert body.is_cone


def test_canonicalize_rejects_negative_level():
    with pytest.raises(DomainError):
        canonicalize([(-1.0, Arc(0.0, 1.0))])


def test_radial_sum_and_scale(half_cones):
    first, second = half_cones
    total = radial_sum(first, second)
    assert at(total, 3 * math.pi / 4) == 5.0
    assert at(total, math.pi / 4) == 2.0
    assert at(scale(0.5, total), 3 * math.pi / 4) == 2.5
    assert scale(0.0, total).rho.terms == ()
    with pytest.raises(DomainError):
        scale(-1.0, total)


def test_union_and_intersection(half_cones):
    first, second = half_cones
    union = polycone_union(first, second)
    meet = polycone_intersect(first, second)
    assert at(union, 3 * math.pi / 4) == 3.0
    assert at(union, math.pi / 4) == 2.0
    assert at(meet, 3 * math.pi / 4) == 2.0
    assert at(meet, math.pi / 4) == 0.0


def test_overlapping_caps_in_three_dimensions_need_grid():
    a = Cap(Direction((0.0, 0.0, 1.0)), 1.0)
    b = Cap(Direction((1.0, 0.0, 0.0)), 1.0)
    with pytest.raises(RequiresGridError):
        canonicalize([(1.0, a), (2.0, b)])


def test_grid_values_and_mismatch(circle_grid):
    body = cone(2.0, circle_grid.cell_region(3))
    values = grid_values(body, circle_grid)
    assert values.tolist() == [0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]
    other = to_grid(body, circle_grid)
    with pytest.raises(GridMismatchError):
        grid_values(other, make_grid(2, m=4))


def test_to_grid_unaligned(circle_grid):
    body = cone(1.0, Arc(0.0, 1.0))
    with pytest.raises(RequiresGridError):
        to_grid(body, circle_grid)
    sampled = to_grid(body, circle_grid, exact=False)
    assert sampled.rho.values[0] == 1.0
    assert sampled.rho.values[1] == 0.0


def test_rotate_grid_radial(circle_grid):
    body = StarSet(2, GridRadial(circle_grid, tuple(float(k) for k in range(8))))
    rotated = rotate_starset(Rotation.planar(math.pi / 4), body)
    assert rotated.rho.values == (7.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    with pytest.raises(UnsupportedRotationError):
        rotate_starset(Rotation.planar(0.1), body)


def test_rotate_sampler_matches_pointwise():
    rho = SamplerRadial(dim=2, fn=lambda u: 1.0 + 0.5 * u.coords[0], bound=1.5, continuous=True)
    sampler = StarSet(2, rho)
    phi = Rotation.planar(0.4)
    rotated = rotate_starset(phi, sampler)
    u = Direction.from_angle(1.1)
    assert at(rotated, 1.1) == pytest.approx(radial_eval(sampler, phi.inverse().apply(u)))


def test_sampler_bound_is_enforced():
    bad = StarSet(2, SamplerRadial(dim=2, fn=lambda u: 5.0, bound=1.0, continuous=True))
    with pytest.raises(DomainError):
        at(bad, 0.3)


def test_is_subset(half_cones):
    first, second = half_cones
    assert is_subset(first, radial_sum(first, second))
    assert not is_subset(radial_sum(first, second), first)


def test_full_sphere_term_is_continuous():
    assert cone(1.5, FullSphere(3)).is_body


cell_terms = st.lists(
    st.tuples(st.integers(min_value=0, max_value=GRID.size - 1), st.sampled_from(DYADIC)),
    min_size=0,
    max_size=6,
)


def _polycone(terms):
    return canonicalize([(level, GRID.cell_region(k)) for k, level in terms], 2, GRID)


@settings(max_examples=40, deadline=None)
@given(cell_terms, cell_terms, cell_terms)
def test_radial_sum_is_commutative_and_associative(a, b, c):
    x, y, z = _polycone(a), _polycone(b), _polycone(c)
    assert np.array_equal(grid_values(radial_sum(x, y), GRID), grid_values(radial_sum(y, x), GRID))
    left = radial_sum(radial_sum(x, y), z)
    right = radial_sum(x, radial_sum(y, z))
    assert np.array_equal(grid_values(left, GRID), grid_values(right, GRID))


@settings(max_examples=40, deadline=None)
@given(cell_terms, st.sampled_from(DYADIC))
def test_scaling_distributes_over_radial_sum(a, t):
    x = _polycone(a)
    y = cone(1.0, GRID.cell_region(0))
    lhs = grid_values(scale(t, radial_sum(x, y)), GRID)
    rhs = grid_values(radial_sum(scale(t, x), scale(t, y)), GRID)
    assert np.array_equal(lhs, rhs)


@settings(max_examples=40, deadline=None)
@given(cell_terms)
def test_canonical_form_has_disjoint_bases(a):
    body = _polycone(a)
    seen = set()
    for _, region in body.terms:
        assert not (seen & region.indices)
        seen |= region.indices
