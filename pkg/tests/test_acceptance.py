"""Acceptance criteria 1-9, each checked at its stated tolerance.  A summary
line per criterion is printed at the end of the session."""

import time
from functools import lru_cache

import numpy as np
import pytest

from cubicderiv.algebra import build_triangular_example, matrix_algebra
from cubicderiv.certify import (
    SUPERSTABLE_VERDICT,
    check_fixed_point_bound,
    check_power_corollary,
    check_recovered_structure,
    superstability_check,
)
from cubicderiv.control import (
    ControlFunction,
    closed_form_power_bound,
    make_perturbed_map,
    measure_delta,
    tilde_series_backward,
    tilde_series_forward,
)
from cubicderiv.errors import DivergenceError, UndefinedBoundError
from cubicderiv.maps import PerturbationSpec, cube_map, residual_sweep
from cubicderiv.probes import make_probes
from cubicderiv.recover import direct_backward, direct_forward, fixed_point_recover, uniqueness_check
from cubicderiv.scenario import builtin_scenario, dumps_report, execute, resolve_config, strip_timestamp

FORWARD_R = (0.0, 1.0, 2.0)
BACKWARD_R = (4.0, 5.0)
EPSILONS = (0.3, 0.03, 0.003)


@lru_cache(maxsize=None)
def example():
    tri, dual, D = build_triangular_example(matrix_algebra(2, real=True), seed=1)
    return tri, dual, D, make_probes(tri, 100, seed=3)


@lru_cache(maxsize=None)
def scenario(r, eps, engine="direct", seed=11):
    """(f, recovery, delta_hat) for D + power-decay(eps, r) under a power-r control."""
    tri, dual, D, probes = example()
    f = make_perturbed_map(D, PerturbationSpec("power-decay", eps, tri, dual, r=r, seed=seed))
    direction = "backward" if r > 3 else "forward"
    phi = ControlFunction("power", 1.0, r=r)
    delta = measure_delta(f, phi, probes, 60, direction).delta
    phi = phi.with_delta(delta)
    if engine == "fixed-point":
        rec = fixed_point_recover(f, phi, probes, 1e-10)
    else:
        rec = (direct_backward if r > 3 else direct_forward)(f, phi, probes, 1e-10)
    rec.attach_exact(D)
    return f, rec, delta


def test_criterion_1_triangular_reproduction(acceptance):
    t0 = time.perf_counter()
    tri, dual, D = build_triangular_example(matrix_algebra(2, real=True), seed=1)
    probes = make_probes(tri, 200 - tri.dim, seed=3)
    summary = residual_sweep(D, probes)
    A, B = probes.pair_coords()
    d_ab = np.abs(D.values(tri.product(A, B))).max()
    runtime = time.perf_counter() - t0
    absolute, relative = summary.maxima(), summary.maxima(relative=True)
    ok = max(absolute.values()) <= 1e-12 and d_ab == 0 and runtime < 5
    acceptance(1, ok, f"{probes.size} probes x {len(probes.scalars)} arc scalars; abs maxima "
                      + ", ".join(f"{k} {v:.2e}" for k, v in absolute.items())
                      + f" (relative max {max(relative.values()):.1e}); D(AB)=0 exact: {d_ab == 0};"
                      f" {runtime:.2f} s")
    assert probes.size == 200 and len(probes.scalars) == 16
    assert d_ab == 0 and runtime < 5
    assert max(absolute.values()) <= 1e-12, absolute


def test_criterion_2_series_closed_form(acceptance):
    _, _, _, probes = example()
    worst = 0.0
    for r in (0.0, 1.0, 2.0, 2.5, 4.0, 5.0):
        direction = "backward" if r > 3 else "forward"
        f, _, _ = scenario(r, 0.3) if r != 2.5 else (None, None, None)
        delta = scenario(r, 0.3)[2] if r != 2.5 else _delta_for(2.5)
        phi = ControlFunction("power", delta, r=r)
        series = tilde_series_backward if r > 3 else tilde_series_forward
        for n in probes.norms:
            s = series(phi, n, tol=1e-13)
            excess = abs(s.value / 16 - closed_form_power_bound(delta, r, n, direction)) - s.tail_bound / 16
            worst = max(worst, excess)
    raised = []
    for call in (lambda: closed_form_power_bound(1.0, 3.0, 1.0),
                 lambda: tilde_series_forward(ControlFunction("power", 1.0, r=3), 1.0),
                 lambda: tilde_series_backward(ControlFunction("power", 1.0, r=3), 1.0)):
        try:
            call()
            raised.append(False)
        except (UndefinedBoundError, DivergenceError):
            raised.append(True)
    ok = worst <= 1e-10 and all(raised)
    acceptance(2, ok, f"max |series/16 - closed form| - tail = {worst:.2e} (<= 1e-10); r=3 raises: {all(raised)}")
    assert ok


def _delta_for(r):
    tri, dual, D, probes = example()
    f = make_perturbed_map(D, PerturbationSpec("power-decay", 0.3, tri, dual, r=r, seed=11))
    return measure_delta(f, ControlFunction("power", 1.0, r=r), probes, 60).delta


def _corollary_sweep(rs):
    violations, margins = 0, []
    for r in rs:
        for eps in EPSILONS:
            f, rec, delta = scenario(r, eps)
            cert = check_power_corollary(f, rec, delta, r)
            violations += len(cert.violations)
            margins.append(cert.min_margin)
    return violations, min(margins)


def test_criterion_3_forward_recovery(acceptance):
    t0 = time.perf_counter()
    violations, margin = _corollary_sweep(FORWARD_R)
    runtime = time.perf_counter() - t0
    ok = violations == 0 and runtime < 30
    acceptance(3, ok, f"9 forward scenarios x 100+ probes: {violations} violations, "
                      f"min margin {margin:.2e}, {runtime:.1f} s")
    assert ok


def test_criterion_4_backward_recovery(acceptance):
    violations, margin = _corollary_sweep(BACKWARD_R)
    acceptance(4, violations == 0, f"6 backward scenarios: {violations} violations, min margin {margin:.2e}")
    assert violations == 0


def test_criterion_5_fixed_point(acceptance):
    _, _, _, probes = example()
    worst_rel, worst_ratio_excess, worst_dist, violations = 0.0, -np.inf, 0.0, 0
    for r in FORWARD_R:
        f, fp, _ = scenario(r, 0.03, "fixed-point")
        for n, it in enumerate(fp.iterates):
            direct = f.values(probes.points * 2.0 ** n) / 8.0 ** n
            rel = np.abs(it - direct).max() / max(1e-300, np.abs(direct).max())
            worst_rel = max(worst_rel, rel)
        k = 2.0 ** (r - 3)
        worst_ratio_excess = max(worst_ratio_excess, max(fp.contraction_ratios, default=0.0) - k)
        worst_dist = max(worst_dist, fp.certified_distance * 16 * (1 - k))
        violations += len(check_fixed_point_bound(f, fp).violations)
    ok = worst_rel <= 1e-14 and worst_ratio_excess <= 1e-12 and worst_dist <= 1 and violations == 0
    acceptance(5, ok, f"iterate rel diff {worst_rel:.1e}; max(ratio - 2^(r-3)) {worst_ratio_excess:.2e}; "
                      f"d(f,D)*16(1-k) max {worst_dist:.3f} (<= 1); bound violations {violations}")
    assert ok


def test_criterion_6_uniqueness(acceptance):
    _, _, _, probes = example()
    f1, r1, _ = scenario(1.0, 0.1, seed=11)
    f2, r2, _ = scenario(1.0, 0.01, seed=12)
    u = uniqueness_check(r1, r2)
    excess = float((u["deviations"] - u["allowed"]).max())
    _, fp, _ = scenario(1.0, 0.1, "fixed-point", seed=11)
    n = fp.N
    agree = np.abs(r1.evaluate(probes.points, n) - fp.values).max()
    ok = bool(np.all(u["deviations"] <= u["allowed"])) and agree <= 1e-12
    acceptance(6, ok, f"max deviation {u['max_deviation']:.2e}, max(dev - tail1 - tail2) {excess:.2e}; "
                      f"direct vs fixed point {agree:.1e}")
    assert ok


def test_criterion_7_superstability(acceptance):
    tri, dual, D, probes = example()
    exact = superstability_check(D, 0.0, 1, 1, probes)
    from cubicderiv.algebra import regular_bimodule, scalar_algebra

    alg = scalar_algebra()
    mod = regular_bimodule(alg)
    h = PerturbationSpec("linear", 0.1, alg, mod, direction=[1.0], weights=[1.0], support="full")
    f = cube_map(mod).with_perturbation(h)
    sp = make_probes(alg, 10, seed=0)
    bad = superstability_check(f, measure_delta(f, ControlFunction("product", 1.0, p=1, q=1), sp).delta,
                               1, 1, sp)
    w = bad.witness or {}
    ok = (exact.passed and exact.verdict_text == SUPERSTABLE_VERDICT and not bad.passed
          and w.get("point") == [[1.0, 0.0]] and abs(w.get("defect", 0) - 0.6) <= 1e-12)
    acceptance(7, ok, f"exact D: '{exact.verdict_text}'; t^3 + 0.1t witness a={w.get('point')} "
                      f"|f(2)-8f(1)| = {w.get('defect')!r}")
    assert ok


def test_criterion_8_recovered_structure(acceptance):
    _, _, _, probes = example()
    runs = [(r, eps, "direct", 11) for r in FORWARD_R + BACKWARD_R for eps in EPSILONS]
    runs += [(r, 0.03, "fixed-point", 11) for r in FORWARD_R]
    runs += [(1.0, 0.1, "direct", 11), (1.0, 0.01, "direct", 12), (1.0, 0.1, "fixed-point", 11)]
    worst = {"scaling": (0.0, None), "homogeneity": (0.0, None), "derivation": (0.0, None)}
    failing = []
    for key in runs:
        f, rec, _ = scenario(*key)
        s = check_recovered_structure(f, rec, probes)
        for name in worst:
            if s[name] > worst[name][0]:
                worst[name] = (s[name], key)
        if s["scaling"] > 1:
            failing.append(f"r={key[0]:g} eps={key[1]:g} {key[2]}: {s['scaling'] * 4:.2f}*tail")
    ok = all(v <= 1 for v, _ in worst.values())
    detail = (f"{len(runs)} recovered maps; worst defect/allowance: scaling {worst['scaling'][0]:.2f} "
              f"(4*tail), homogeneity {worst['homogeneity'][0]:.2e} (2*tail), derivation "
              f"{worst['derivation'][0]:.2e} (envelope)")
    if failing:
        detail += f"; scaling exceeds 4*tail in {len(failing)} maps, e.g. " + "; ".join(failing[:3])
    acceptance(8, ok, detail)
    assert worst["homogeneity"][0] <= 1 and worst["derivation"][0] <= 1
    assert worst["scaling"][0] <= 1, failing


def test_criterion_9_determinism(acceptance):
    names = ("triangular-exact", "power-r1-eps0.1", "power-r4-eps0.03", "fixed-point-r1-eps0.1")
    same = []
    for name in names:
        texts = [dumps_report(strip_timestamp(execute(resolve_config(builtin_scenario(name))).report))
                 for _ in range(2)]
        same.append(texts[0] == texts[1])
    acceptance(9, all(same), f"{sum(same)}/{len(names)} scenarios byte-identical across reruns")
    assert all(same)
