import dataclasses

import numpy as np
import pytest

from cubicderiv.certify import (
    CSV_COLUMNS,
    SUPERSTABLE_VERDICT,
    check_fixed_point_bound,
    check_power_corollary,
    check_recovered_structure,
    check_stability_bound,
    superstability_check,
)
from cubicderiv.control import ControlFunction, make_perturbed_map, measure_delta
from cubicderiv.errors import UndefinedBoundError
from cubicderiv.maps import PerturbationSpec, cube_map, zero_map
from cubicderiv.probes import make_probes
from cubicderiv.recover import direct_backward, direct_forward, fixed_point_recover


def pipeline(triangular, probes, kind, eps, r, engine=direct_forward, seed=11):
    tri, dual, D = triangular
    h = PerturbationSpec(kind, eps, tri, dual, r=r, seed=seed)
    f = make_perturbed_map(D, h)
    phi = ControlFunction("power", 1.0, r=r)
    est = measure_delta(f, phi, probes, 60, "backward" if r > 3 else "forward")
    return f, h, est.delta, engine(f, phi.with_delta(est.delta), probes)


def test_exact_map_margins_equal_bounds(triangular, tri_probes):
    _, _, D = triangular
    rec = direct_forward(D, ControlFunction("power", 0.0, r=1), tri_probes)
    cert = check_power_corollary(D, rec, 0.0, 1.0)
    assert np.all(cert.deviations == 0)
    np.testing.assert_array_equal(cert.margins, cert.bounds)
    assert cert.passed


def test_bounded_perturbation_passes(triangular, tri_probes):
    f, _, delta, rec = pipeline(triangular, tri_probes, "bounded", 0.1, 0.0)
    for cert in (check_stability_bound(f, rec), check_power_corollary(f, rec, delta, 0.0)):
        assert cert.passed, cert.min_margin


def test_adversarial_shift_fails(triangular, tri_probes):
    f, h, delta, rec = pipeline(triangular, tri_probes, "bounded", 0.1, 0.0)
    bad = dataclasses.replace(rec, values=rec.values + h.direction[None, :])
    cert = check_stability_bound(f, bad)
    assert not cert.passed and len(cert.violations) == tri_probes.size


def test_unit_norm_bound_values(triangular, tri_probes):
    f, _, delta, rec = pipeline(triangular, tri_probes, "power-decay", 0.1, 1.0)
    cert = check_power_corollary(f, rec, delta, 1.0)
    unit = np.isclose(cert.norms, 1.0)
    assert unit.sum() >= 24
    np.testing.assert_allclose(cert.bounds[unit], delta / 12)
    f, _, delta, rec = pipeline(triangular, tri_probes, "power-decay", 0.1, 4.0, direct_backward)
    cert = check_power_corollary(f, rec, delta, 4.0)
    np.testing.assert_allclose(cert.bounds[np.isclose(cert.norms, 1.0)], delta / 16)
    with pytest.raises(UndefinedBoundError):
        check_power_corollary(f, rec, delta, 3.0)


def test_fixed_point_bound(triangular, tri_probes):
    f, _, delta, _ = pipeline(triangular, tri_probes, "power-decay", 0.1, 1.0)
    fp = fixed_point_recover(f, ControlFunction("power", delta, r=1), tri_probes)
    cert = check_fixed_point_bound(f, fp)
    assert cert.constants["coefficient"] == pytest.approx(1 / 12)
    assert cert.passed
    _, _, D = triangular
    exact = fixed_point_recover(D, ControlFunction("power", 1.0, r=1), tri_probes)
    c = check_fixed_point_bound(D, exact)
    np.testing.assert_array_equal(c.margins, c.bounds)


def test_superstability_exact_and_zero(triangular, tri_probes):
    _, dual, D = triangular
    for f in (D, zero_map(dual)):
        cert = superstability_check(f, 0.0, 1, 1, tri_probes)
        assert cert.passed and cert.verdict_text == SUPERSTABLE_VERDICT
        assert "arc samples" in cert.notes[0]


def test_superstability_scalar_witness(scalar):
    alg, mod = scalar
    h = PerturbationSpec("linear", 0.1, alg, mod, direction=[1.0], weights=[1.0], support="full")
    f = cube_map(mod).with_perturbation(h)
    probes = make_probes(alg, 10, seed=0)
    cert = superstability_check(f, float("inf"), 1, 1, probes)
    assert not cert.passed
    w = cert.witness
    assert w["probe_id"] == 0 and w["point"] == [[1.0, 0.0]]
    assert abs(w["defect"] - 0.6) <= 1e-12


def test_superstability_rejects_excluded_exponent(triangular, tri_probes):
    _, _, D = triangular
    with pytest.raises(UndefinedBoundError):
        superstability_check(D, 0.0, 1, 2, tri_probes)


def test_csv_layout(triangular, tri_probes):
    f, _, delta, rec = pipeline(triangular, tri_probes, "power-decay", 0.1, 1.0)
    text = check_power_corollary(f, rec, delta, 1.0).to_csv().splitlines()
    assert tuple(text[0].split(",")) == CSV_COLUMNS
    assert len(text) == tri_probes.size + 1


def test_structure_checks_hold_for_linear_growth(triangular, tri_probes):
    f, _, _, rec = pipeline(triangular, tri_probes, "power-decay", 0.1, 1.0)
    s = check_recovered_structure(f, rec, tri_probes)
    assert all(s["passed"].values())


@pytest.mark.parametrize("r,engine", [(0.0, direct_forward), (4.0, direct_backward), (5.0, direct_backward)])
def test_scaling_defect_within_telescoping_constant(triangular, tri_probes, r, engine):
    """||D(2a) - 8 D(a)|| is bounded by 8(1-q) tail forward and 8(1-q)/q tail backward."""
    f, _, _, rec = pipeline(triangular, tri_probes, "power-decay", 0.3, r, engine)
    assert check_recovered_structure(f, rec, tri_probes)["scaling_sharp"] <= 1.0
