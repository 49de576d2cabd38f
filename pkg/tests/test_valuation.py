import pytest

from dualvol.characterize.valuation import valuation_pipeline
from dualvol.functionals.checks import Verdict
from dualvol.functionals.implementations import mixed_volume_functional
from dualvol.functionals.registry import gallery


def test_mixed_volume_valuation(circle_grid):
    report = valuation_pipeline(mixed_volume_functional(2, 3.0, circle_grid), trials=20, seed=1)
    assert report.passed
    assert all(verdict == Verdict.PASS for verdict in report.checks.values())
    expected = {"valuation", "empty", "rotation", "proportional", "volume", "cone"}
    assert set(report.checks) == expected
    assert report.lam == pytest.approx(1.5, rel=1e-12)
    assert report.c_from_density == pytest.approx(3.0, rel=1e-12)
    assert report.c_estimate == pytest.approx(3.0, rel=1e-12)
    assert report.empty_value == 0.0


def test_valuation_in_three_dimensions(sphere_grid):
    report = valuation_pipeline(mixed_volume_functional(3, 1.0, sphere_grid), trials=10, seed=4)
    assert report.passed
    assert report.c_from_density == pytest.approx(1.0, rel=1e-12)


def test_weighted_valuation_is_not_proportional(circle_grid):
    report = valuation_pipeline(gallery("weighted-by-m", circle_grid), trials=20, seed=1)
    assert report.checks["valuation"] == Verdict.PASS
    assert report.checks["rotation"] == Verdict.FAIL
    assert report.checks["proportional"] == Verdict.FAIL
    assert not report.passed


def test_product_of_integrals_is_not_a_valuation(circle_grid):
    report = valuation_pipeline(gallery("product-of-integrals", circle_grid), trials=20, seed=1)
    assert report.checks["valuation"] == Verdict.FAIL


def test_density_profile_rows(circle_grid):
    report = valuation_pipeline(mixed_volume_functional(2, 1.0, circle_grid), trials=5, seed=2)
    rows = report.density_profile(circle_grid)
    assert len(rows) == circle_grid.size
    assert rows[0][0] == 0
    assert rows[0][1] == pytest.approx(0.5)
    data = report.to_dict()
    assert data["checks"]["cone"] == "pass"
    assert data["lambda"] == pytest.approx(0.5)
