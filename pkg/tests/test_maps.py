import json

import numpy as np
import pytest

from cubicderiv.algebra import Element, matrix_algebra, regular_bimodule
from cubicderiv.errors import ConfigurationError, DimensionError
from cubicderiv.maps import (
    MapExpr,
    PerturbationSpec,
    cube_map,
    cubic_residual,
    derivation_residual,
    homogeneity_residual,
    residual_sweep,
    two_sided_annihilator,
    zero_map,
)
from cubicderiv.probes import make_probes


def scalar_el(alg, t):
    return Element(np.array([t], dtype=complex), alg)


def test_scalar_cube_at_two(scalar):
    alg, mod = scalar
    assert cube_map(mod)(scalar_el(alg, 2)).coords[0] == 8


def test_map_at_zero_is_zero(scalar, triangular):
    alg, mod = scalar
    f = cube_map(mod).with_perturbation(lambda P: np.ones_like(P))
    assert f(alg.zero()).coords[0] == 0
    tri, _, D = triangular
    assert np.all(D(tri.zero()).coords == 0)


def test_triangular_map_matches_direct_formula(triangular, rng):
    """D(A) = G0.A^3 - A^3.G0 computed with the bimodule actions."""
    tri, dual, D = triangular
    from cubicderiv.algebra import seeded_dual_functional

    g0 = seeded_dual_functional(dual, 1).coords
    A = rng.standard_normal((10, 24))
    A3 = tri.cube(A)
    G = np.broadcast_to(g0, (10, 28))
    direct = dual.act_right(G, A3) - dual.act_left(A3, G)
    np.testing.assert_allclose(D.values(A), direct, atol=1e-12)


def test_symmetry_enforced(scalar):
    alg, mod = scalar
    with pytest.raises(DimensionError):
        MapExpr(np.zeros((1, 2, 2, 2)), alg, mod)
    alg2 = matrix_algebra(2)
    T = np.zeros((4, 4, 4, 4))
    T[0, 0, 1, 2] = 1.0
    with pytest.raises(ConfigurationError):
        MapExpr(T, alg2, regular_bimodule(alg2))


def test_cube_satisfies_cubic_identity(scalar):
    alg, mod = scalar
    f = cube_map(mod)
    one = scalar_el(alg, 1)
    assert cubic_residual(f, one, one) == 0  # 27 + 1 - 16 - 0 - 12


def test_square_map_cubic_residual(scalar):
    alg, mod = scalar
    f = zero_map(mod).with_perturbation(lambda P: P ** 2)
    assert cubic_residual(f, scalar_el(alg, 1), alg.zero()) == pytest.approx(8.0, abs=1e-15)


def test_triangular_cubic_residual_small(triangular, tri_probes):
    tri, _, D = triangular
    a, b = tri.element(tri_probes.points[7]), tri.element(tri_probes.points[40])
    lam = tri_probes.scalars[5]
    assert cubic_residual(D, a, b, lam) <= 1e-12


def test_derivation_residuals(scalar, triangular, tri_probes):
    alg, mod = scalar
    one = scalar_el(alg, 1)
    assert derivation_residual(cube_map(mod), one, one) == 1
    assert derivation_residual(zero_map(mod), one, one) == 0
    tri, _, D = triangular
    for i, j in tri_probes.pairs[:20]:
        if i >= 0 and j >= 0:
            c, d = tri.element(tri_probes.points[i]), tri.element(tri_probes.points[j])
            assert derivation_residual(D, c, d) == 0


def test_homogeneity_residuals(scalar, triangular, tri_probes):
    alg, mod = scalar
    one = scalar_el(alg, 1)
    assert homogeneity_residual(cube_map(mod), 1j, one) == pytest.approx(0, abs=1e-16)
    f = cube_map(mod).with_perturbation(lambda P: P)
    assert homogeneity_residual(f, 2, one) == pytest.approx(6.0)
    tri, _, D = triangular
    a = tri.element(tri_probes.points[50])
    scale = max(1.0, D(a).norm)
    for lam in tri_probes.scalars:
        assert homogeneity_residual(D, lam, a) <= 1e-12 * scale


def test_sweep_exact_and_zero(triangular, tri_probes):
    _, dual, D = triangular
    s = residual_sweep(D, tri_probes)
    rel = s.maxima(relative=True)
    assert max(rel.values()) <= 1e-12
    assert s.max_derivation == 0
    z = residual_sweep(zero_map(dual), tri_probes)
    assert max(z.maxima().values()) == 0


def test_bounded_perturbation_envelope(triangular, tri_probes):
    tri, dual, D = triangular
    h = PerturbationSpec("bounded", 0.1, tri, dual, seed=5)
    s = residual_sweep(D.with_perturbation(h), tri_probes)
    assert 0 < s.max_cubic <= 1.8


def test_sweep_serialization(triangular, tri_probes):
    _, _, D = triangular
    s = residual_sweep(D, tri_probes)
    rec = json.loads(s.to_json())
    assert rec["seed"] == 3 and len(rec["records"]) == len(s.records)
    lines = s.to_csv().splitlines()
    assert lines[0] == "probe_id,family,value,relative"
    assert len(lines) == len(s.records) + 1


def test_perturbation_is_seeded_unit_and_annihilated(triangular, rng):
    tri, dual, _ = triangular
    h1 = PerturbationSpec("power-decay", 0.2, tri, dual, r=1, seed=9)
    h2 = PerturbationSpec("power-decay", 0.2, tri, dual, r=1, seed=9)
    np.testing.assert_array_equal(h1.direction, h2.direction)
    assert dual.norm(h1.direction) == pytest.approx(1.0)
    A = rng.standard_normal((5, 24))
    U = np.broadcast_to(h1.direction, (5, 28))
    assert np.abs(dual.act_left(A, U)).max() < 1e-12
    assert np.abs(dual.act_right(U, A)).max() < 1e-12
    P = rng.standard_normal((30, 24))
    assert np.all(dual.norm(h1(P)) <= h1.envelope(P) + 1e-15)
    assert two_sided_annihilator(dual).shape[1] == 4


def test_unknown_perturbation_kind(triangular):
    tri, dual, _ = triangular
    with pytest.raises(ConfigurationError):
        PerturbationSpec("wiggly", 0.1, tri, dual)


def test_probes_are_deterministic(triangular):
    tri, _, _ = triangular
    a, b = make_probes(tri, 20, seed=8), make_probes(tri, 20, seed=8)
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.pairs, b.pairs)
    n = a.norms[24:]
    assert n.min() == pytest.approx(1e-2) and n.max() == pytest.approx(1e2)
