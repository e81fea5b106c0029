import numpy as np
import pytest

from foldkit.errors import InconsistentTemplate, PointOutsideTemplate
from foldkit.lattice.template import FoldedTemplate, attach, validate_template
from foldkit.sampling import make_rng

from .conftest import data_path


def load(name):
    return FoldedTemplate.load(data_path(name))


def test_attach_on_quadrant():
    T = load("quadrant.json")
    assert attach(T, [1, 1]).subtorus_rank == 0
    edge = attach(T, [0, 1])
    assert edge.normals == [(1, 0)] and edge.subtorus_rank == 1
    corner = attach(T, ["0", "0"])
    assert corner.subtorus_rank == 2
    assert sorted(corner.weights) == [(0, 1), (1, 0)]


def test_attach_accepts_rational_strings():
    T = load("quadrant.json")
    assert attach(T, ["3/2", "0"]).normals == [(0, 1)]


def test_attach_outside_template():
    T = load("quadrant.json")
    with pytest.raises(PointOutsideTemplate):
        attach(T, [-1, 1])


def test_attach_constant_along_strata():
    T = load("quadrant.json")
    rng = make_rng(2)
    region = T.regions[0]
    for active in region.domain.strata():
        keys = {attach(T, p).key() for p in region.domain.boundary_sample(rng, 30, active)}
        assert len(keys) == 1
    keys = {attach(T, p).key() for p in region.domain.sample(rng, 30)}
    assert keys == {()}


def test_attach_agrees_across_fold_wall():
    T = load("folded_strip.json")
    for x in [0.0, 0.5, 1.3]:
        a = attach(T, [x, 0.0], region_id=0)
        b = attach(T, [x, 0.0], region_id=1)
        assert a.key() == b.key()


def test_inconsistent_template_is_rejected():
    T = load("inconsistent.json")
    with pytest.raises(InconsistentTemplate):
        attach(T, [0, 0])
    report = validate_template(T, samples_per_region=4)
    assert not report.passed
    assert not report.checks["d"]


@pytest.mark.parametrize("name", ["quadrant.json", "disk.json", "folded_strip.json", "cube.json"])
def test_valid_templates_pass(name):
    report = validate_template(load(name), samples_per_region=8)
    assert report.passed, report.failures


def test_strip_reports_fold_points():
    report = validate_template(load("folded_strip.json"), samples_per_region=8)
    assert sum(report.fold_points.values()) > 0


def test_halfplane_fails_transversality_check():
    report = validate_template(load("halfplane_bad.json"), samples_per_region=8)
    assert not report.passed
    assert not report.checks["c"]
    assert all(f["check"] == "c" for f in report.failures)


def test_validation_is_deterministic():
    a = validate_template(load("inconsistent.json"), samples_per_region=4, seed=7).to_dict()
    b = validate_template(load("inconsistent.json"), samples_per_region=4, seed=7).to_dict()
    assert a == b
