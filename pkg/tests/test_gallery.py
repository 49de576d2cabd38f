import math

import pytest

from dualvol.characterize.recovery import recover_measure
from dualvol.core.starset import ball, grid_values
from dualvol.errors import InvalidParameterError
from dualvol.functionals.auditor import PropertyAuditor
from dualvol.functionals.gallery import (
    DESIGNATED_FAILURES,
    default_weight_body,
    is_centered_ball,
    weighted_by_m,
)
from dualvol.functionals.registry import FunctionalRegistry, gallery, normalize_name

AUDITED = ("additive", "vanishing", "rotation")


@pytest.fixture
def registry():
    return FunctionalRegistry()


def test_registry_lists_the_gallery(registry):
    assert registry.list_names() == ["intersection-volume", "product-of-integrals", "weighted-by-m"]
    for name, prop in DESIGNATED_FAILURES.items():
        assert registry.designated_failure(name) == prop
        definition = registry.get_definition(name)
        assert definition is not None
        assert prop not in definition.holds


def test_registry_without_definitions_still_builds(tmp_path, circle_grid):
    registry = FunctionalRegistry(str(tmp_path / "missing"))
    assert registry.get_definition("weighted-by-m") is None
    assert registry.designated_failure("weighted_by_m") == "rotation"
    assert registry.build("product-of-integrals", 2, circle_grid).name == "product-of-integrals"


def test_registry_skips_broken_yaml(tmp_path):
    (tmp_path / "broken.yaml").write_text("name: [unclosed\n")
    (tmp_path / "ok.yaml").write_text(
        "name: Intersection_Volume\ndescription: custom\nviolates: additive\n"
    )
    registry = FunctionalRegistry(str(tmp_path))
    assert registry.get_definition("intersection-volume").description == "custom"


def test_unknown_name(registry, circle_grid):
    with pytest.raises(InvalidParameterError):
        registry.build("nothing", 2, circle_grid)


def test_normalize_name():
    assert normalize_name(" Weighted_By_M ") == "weighted-by-m"


@pytest.mark.parametrize("name", sorted(DESIGNATED_FAILURES))
def test_each_counterexample_fails_exactly_its_property(name, circle_grid):
    functional = gallery(name, circle_grid)
    reports = PropertyAuditor(functional, circle_grid, trials=30, seed=3).run(AUDITED)
    failed = [report.name for report in reports if report.failed]
    assert failed == [DESIGNATED_FAILURES[name]]


def test_counterexamples_in_three_dimensions(sphere_grid):
    for name in ("intersection-volume", "product-of-integrals"):
        functional = gallery(name, sphere_grid)
        reports = PropertyAuditor(functional, sphere_grid, trials=20, seed=8).run(AUDITED)
        assert [r.name for r in reports if r.failed] == [DESIGNATED_FAILURES[name]]


def test_weighted_by_m_rejects_centered_ball(circle_grid):
    with pytest.raises(InvalidParameterError):
        weighted_by_m(2, circle_grid, weight_body=ball(2, 2.0))
    assert is_centered_ball(ball(2, 2.0))
    assert not is_centered_ball(default_weight_body(2))


def test_weighted_by_m_on_balls(circle_grid):
    functional = weighted_by_m(2, circle_grid)
    a = ball(2, 1.0)
    # weight 3/2 on the upper half circle, 1 on the lower
    assert functional(a, a) == pytest.approx(2.5 * math.pi, rel=1e-12)
    assert weighted_by_m(2)(a, a) == pytest.approx(2.5 * math.pi, rel=1e-12)


def test_default_weight_body_is_grid_aligned(circle_grid, sphere_grid):
    body = default_weight_body(2, circle_grid)
    assert grid_values(body, circle_grid).tolist() == [1.5] * 4 + [1.0] * 4
    values = grid_values(default_weight_body(3, sphere_grid), sphere_grid)
    assert values.tolist() == [1.5, 1.5, 1.0, 1.0] * 2


def test_weighted_by_m_recovers_cell_integrals_of_the_weight(circle_grid):
    functional = weighted_by_m(2, circle_grid)
    recovered = recover_measure(functional, validation_trials=100, seed=5)
    rho_m = grid_values(default_weight_body(2, circle_grid), circle_grid)
    expected = {(k, k): float(circle_grid.weights[k] * rho_m[k]) for k in range(8)}
    weights = recovered.kernel.weights
    assert set(weights) == set(expected)
    for index, value in expected.items():
        assert weights[index] == pytest.approx(value, rel=1e-12)
    assert recovered.residual <= 1e-12


def test_weighted_by_m_in_three_dimensions(sphere_grid):
    functional = gallery("weighted-by-m", sphere_grid)
    reports = PropertyAuditor(functional, sphere_grid, trials=20, seed=8).run(AUDITED)
    assert [r.name for r in reports if r.failed] == ["rotation"]
