import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cubicderiv.algebra import build_triangular_example, matrix_algebra, regular_bimodule, triangular_algebra
from cubicderiv.control import ControlFunction, closed_form_power_bound, tilde_series_backward, tilde_series_forward
from cubicderiv.maps import cube_map, cubic_residual_terms, derivation_residual_terms, homogeneity_residual_terms

SETTINGS = settings(max_examples=60, deadline=None)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
BASE = matrix_algebra(2, real=True)
TRI, DUAL, D = build_triangular_example(BASE, seed=1)
MAT = matrix_algebra(2)
CUBE = cube_map(regular_bimodule(MAT))


def vec(n):
    return arrays(np.float64, n, elements=finite)


unit_scalar = st.floats(0, 2 * np.pi).map(lambda t: complex(np.cos(t), np.sin(t)))


@SETTINGS
@given(vec(24), vec(24), vec(24))
def test_triangular_product_is_associative(a, b, c):
    lhs = TRI.product(TRI.product(a, b), c)
    rhs = TRI.product(a, TRI.product(b, c))
    assert np.allclose(lhs, rhs, atol=1e-10 * max(1.0, np.abs(lhs).max()))


@SETTINGS
@given(vec(24), vec(24))
def test_block_sum_norm_is_submultiplicative(a, b):
    assert TRI.norm(TRI.product(a, b)) <= TRI.norm(a) * TRI.norm(b) * (1 + 1e-12) + 1e-300


@SETTINGS
@given(vec(24), vec(24))
def test_triangular_map_is_a_derivation(a, b):
    R, _ = derivation_residual_terms(D, a[None], b[None])
    assert np.all(R == 0)


@SETTINGS
@given(vec(24), vec(24), unit_scalar)
def test_triangular_map_is_cubic(a, b, lam):
    R, scale, _ = cubic_residual_terms(D, a[None], b[None], lam)
    assert DUAL.norm(R)[0] <= 1e-13 * max(1.0, scale[0])


@SETTINGS
@given(vec(4), vec(4), st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_matrix_cube_is_cubic_and_homogeneous(a, b, lam):
    R, scale, _ = cubic_residual_terms(CUBE, a[None], b[None], lam)
    assert MAT.norm(R)[0] <= 1e-13 * max(1.0, scale[0])
    H, hs, _ = homogeneity_residual_terms(CUBE, a[None], lam)
    assert MAT.norm(H)[0] <= 1e-13 * max(1.0, hs[0])


@SETTINGS
@given(st.floats(0, 2.8), st.floats(1e-3, 1e3), st.floats(0.01, 10))
def test_forward_series_closed_form(r, t, delta):
    phi = ControlFunction("power", delta, r=r)
    s = tilde_series_forward(phi, t, tol=1e-13 * max(1.0, phi(t)))
    bound = closed_form_power_bound(delta, r, t)
    # a few ulps of the bound on top of the truncation tail
    assert abs(s.value / 16 - bound) <= s.tail_bound / 16 + 1e-14 * max(1.0, bound)


@SETTINGS
@given(st.floats(3.2, 8), st.floats(1e-3, 1e3), st.floats(0.01, 10))
def test_backward_series_closed_form(r, t, delta):
    phi = ControlFunction("power", delta, r=r)
    s = tilde_series_backward(phi, t, tol=1e-13 * max(1.0, phi(t)))
    bound = closed_form_power_bound(delta, r, t, "backward")
    assert abs(s.value / 16 - bound) <= s.tail_bound / 16 + 1e-14 * max(1.0, bound)


@SETTINGS
@given(st.floats(0, 6), st.floats(1e-3, 1e3), st.floats(0, 1e3))
def test_power_control_scales_dyadically(r, na, nb):
    phi = ControlFunction("power", 1.0, r=r)
    assert np.isclose(phi(2 * na, 2 * nb), 2 ** r * phi(na, nb), rtol=1e-12)


@SETTINGS
@given(vec(24), st.integers(0, 40))
def test_exact_map_is_fixed_by_dyadic_scaling(a, n):
    P = a[None]
    np.testing.assert_array_equal(D.values(P * 2.0 ** n) / 8.0 ** n, D.values(P))


def test_series_near_three_leaves_the_scale_window():
    import pytest
    from cubicderiv.errors import ScaleLimitError

    with pytest.raises(ScaleLimitError):
        tilde_series_backward(ControlFunction("power", 1.0, r=3.01), 1.0, tol=1e-13)
