import json
import math

import pytest

from dualvol.core.sphere import ArcSet, Direction
from dualvol.core.starset import GridRadial, Polycone, radial_eval
from dualvol.errors import DescriptorError, GridMismatchError
from dualvol.functionals.implementations import DiagonalFunctional, KernelFunctional
from dualvol.io.descriptors import (
    functional_from_data,
    load_bodies,
    load_functional,
    parse_grid,
    parse_region,
    parse_star_set,
)
from dualvol.io.reports import emit_plot_data, format_csv, format_float, format_json, write_report


def half_cone(alpha, start, end):
    return {"dim": 2, "rho": {"type": "simple", "terms": [
        {"alpha": alpha, "base": {"type": "arc", "start": start, "end": end}}
    ]}}


def test_parse_grid_forms():
    assert parse_grid("dim=2,m=8").size == 8
    assert parse_grid({"dim": 3, "bands": 2, "sectors": 4}).size == 8
    with pytest.raises(DescriptorError) as excinfo:
        parse_grid({"dim": 3, "bands": 2, "sectors": 4, "extra": 1})
    assert "grid" in excinfo.value.field


def test_parse_regions():
    region = parse_region({"type": "arcs", "intervals": [[0.0, 1.0], [2.0, 3.0]]}, 2)
    assert isinstance(region, ArcSet)
    cap = parse_region({"type": "cap", "center": [0.0, 0.0, 1.0], "radius": 0.5}, 3)
    assert cap.radius == 0.5
    with pytest.raises(DescriptorError):
        parse_region({"type": "arc", "start": 0.0, "end": 1.0}, 3)
    with pytest.raises(DescriptorError):
        parse_region({"type": "cap", "center": [1.0, 1.0], "radius": 0.5}, 2)
    with pytest.raises(DescriptorError):
        parse_region({"type": "blob"}, 2)


def test_parse_star_set_canonicalizes():
    body = parse_star_set({"dim": 2, "rho": {"type": "simple", "terms": [
        {"alpha": 1.0, "base": {"type": "arc", "start": 0.0, "end": math.pi}},
        {"alpha": 2.0, "base": {"type": "arc", "start": 1.0, "end": 2.0}},
    ]}})
    assert isinstance(body, Polycone)
    assert radial_eval(body, Direction.from_angle(1.5)) == 2.0


def test_parse_grid_star_set():
    body = parse_star_set(
        {"dim": 2, "rho": {"type": "grid", "grid": "dim=2,m=4", "values": [1, 2, 3, 4]}}
    )
    assert isinstance(body.rho, GridRadial)
    with pytest.raises(DescriptorError) as excinfo:
        parse_star_set({"dim": 2, "rho": {"type": "grid", "grid": "dim=2,m=4", "values": [1, 2]}})
    assert excinfo.value.field == "body.rho.values"


def test_parse_star_set_field_paths():
    with pytest.raises(DescriptorError) as excinfo:
        parse_star_set({"dim": 2, "rho": {"type": "simple", "terms": [], "shape": "round"}})
    assert excinfo.value.field.startswith("body.rho")
    with pytest.raises(DescriptorError) as excinfo:
        parse_star_set(half_cone(-1.0, 0.0, 1.0))
    assert excinfo.value.field == "body.rho"


def test_overlapping_caps_stay_unrefined():
    body = parse_star_set({"dim": 3, "rho": {"type": "simple", "terms": [
        {"alpha": 1.0, "base": {"type": "cap", "center": [0, 0, 1], "radius": 1.0}},
        {"alpha": 2.0, "base": {"type": "cap", "center": [1, 0, 0], "radius": 1.0}},
    ]}})
    assert not isinstance(body, Polycone)
    assert radial_eval(body, Direction((1.0, 0.0, 0.0))) == 2.0


def test_load_bodies_forms(tmp_path):
    listed = tmp_path / "list.json"
    listed.write_text(json.dumps([half_cone(2.0, 0.0, math.pi), half_cone(3.0, 1.0, 4.0)]))
    wrapped = tmp_path / "wrapped.json"
    wrapped.write_text(json.dumps({"bodies": [half_cone(2.0, 0.0, math.pi)]}))
    single = tmp_path / "single.json"
    single.write_text(json.dumps(half_cone(2.0, 0.0, math.pi)))
    assert len(load_bodies(listed)) == 2
    assert len(load_bodies(wrapped)) == 1
    assert len(load_bodies(single)) == 1


def test_load_bodies_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DescriptorError):
        load_bodies(bad)
    negative = tmp_path / "negative.json"
    negative.write_text(json.dumps([half_cone(2.0, 0.0, 1.0), half_cone(-2.0, 0.0, 1.0)]))
    with pytest.raises(DescriptorError) as excinfo:
        load_bodies(negative)
    assert excinfo.value.field == "bodies.1.rho"


def test_functional_descriptors(tmp_path, circle_grid):
    kernel = functional_from_data({"grid": "dim=2,m=8", "entries": [{"idx": [0, 1], "w": 2.0}]})
    assert isinstance(kernel, KernelFunctional)
    assert kernel.weights == {(0, 1): 2.0}
    diagonal = functional_from_data(
        {"grid": {"dim": 2, "m": 8}, "weights": [1.0] * 8, "name": "flat"}
    )
    assert isinstance(diagonal, DiagonalFunctional)
    assert diagonal.name == "flat"
    path = tmp_path / "kernel.json"
    path.write_text(json.dumps(kernel.to_descriptor()))
    assert load_functional(path, circle_grid).weights == kernel.weights


def test_functional_descriptor_errors():
    with pytest.raises(DescriptorError) as excinfo:
        entries = [{"idx": [0, 1], "w": 1.0}, {"idx": [0, 1], "w": 2.0}]
        functional_from_data({"grid": "dim=2,m=8", "entries": entries})
    assert excinfo.value.field == "functional.entries.1.idx"
    with pytest.raises(DescriptorError):
        functional_from_data({"grid": "dim=2,m=8", "entries": [{"idx": [0, 1], "w": -1.0}]})
    with pytest.raises(GridMismatchError):
        functional_from_data({"grid": "dim=2,m=8", "weights": [1.0] * 8}, parse_grid("dim=2,m=4"))


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(float("nan")) == "null"
    assert format_float(float("inf")) == "null"


def test_format_json_is_deterministic():
    payload = {"b": 1, "a": [1.5, None, True], "c": {"z": "x", "y": float("nan")}}
    text = format_json(payload)
    assert text == format_json(dict(reversed(list(payload.items()))))
    parsed = json.loads(text)
    assert list(parsed) == ["a", "b", "c"]
    assert parsed["c"]["y"] is None


def test_csv_and_files(tmp_path, capsys):
    assert format_csv(["n", "x"], [(1, 0.5), (2, 1 / 3)]) == "n,x\n1,0.5\n2,0.33333333333333331\n"
    target = tmp_path / "nested" / "series.csv"
    emit_plot_data(["n"], [(1,)], str(target))
    assert target.read_text() == "n\n1\n"
    write_report({"ok": True})
    assert json.loads(capsys.readouterr().out) == {"ok": True}
