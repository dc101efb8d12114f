import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvlab.curvature import (
    abc_at_r,
    abc_at_x,
    abc_native,
    chern_density_k,
    curvature_table,
    ricci_eigenvalues,
    scalar_curvature,
    sigma_k,
)

from _oracles import chern_density_oracle, rational_abc, sigma_oracle

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


# ---------------------------------------------------------------------------
# pointwise algebra


def test_ricci_eigenvalues_definition():
    A, B, C, n = 0.7, 0.3, 0.2, 3
    lam, mu = ricci_eigenvalues(A, B, C, n)
    assert lam == pytest.approx(A + (n - 1) * B)
    assert mu == pytest.approx(B + n * C / 2.0)


def test_scalar_curvature_definition():
    A, B, C, n = 0.7, 0.3, 0.2, 3
    R = scalar_curvature(A, B, C, n)
    assert R == pytest.approx(A + 2 * (n - 1) * B + 0.5 * n * (n - 1) * C)


def test_sigma2_frozen_example():
    # eigenvalue multiset {2, 2, 3, 3, 3, 3}: sum of pairwise products is 106
    assert sigma_k(2.0, 3.0, 3, 2) == pytest.approx(106.0, rel=1e-15)


@settings(max_examples=1000, deadline=None)
@given(finite, finite, finite, st.integers(min_value=2, max_value=6))
def test_sigma1_is_twice_scalar(A, B, C, n):
    lam, mu = ricci_eigenvalues(A, B, C, n)
    R = scalar_curvature(A, B, C, n)
    assert sigma_k(lam, mu, n, 1) == pytest.approx(2.0 * R, rel=1e-12, abs=1e-12)


def test_sigma_k_matches_bruteforce_all_orders():
    rng = np.random.default_rng(20260815)
    for n in (2, 3, 4):
        for _ in range(200):
            lam, mu = rng.uniform(-3.0, 3.0, size=2)
            for k in range(1, 2 * n + 1):
                want = sigma_oracle(lam, mu, n, k)
                got = sigma_k(lam, mu, n, k)
                assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_chern_density_matches_wedge_oracle():
    rng = np.random.default_rng(31415)
    for n in (2, 3, 4):
        for _ in range(200):
            lam, mu = rng.uniform(-3.0, 3.0, size=2)
            for k in range(1, n + 1):
                want = chern_density_oracle(lam, mu, n, k)
                got = chern_density_k(lam, mu, n, k)
                assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(finite, finite, finite, st.integers(min_value=2, max_value=5))
def test_chern_density_edge_orders(A, B, C, n):
    lam, mu = ricci_eigenvalues(A, B, C, n)
    R = scalar_curvature(A, B, C, n)
    assert chern_density_k(lam, mu, n, 1) == pytest.approx(R / n, rel=1e-12, abs=1e-12)
    assert chern_density_k(lam, mu, n, n) == pytest.approx(
        lam * mu ** (n - 1), rel=1e-12, abs=1e-12
    )


def test_order_bounds_are_enforced():
    with pytest.raises(ValueError):
        sigma_k(1.0, 1.0, 2, 0)
    with pytest.raises(ValueError):
        sigma_k(1.0, 1.0, 2, 5)
    with pytest.raises(ValueError):
        chern_density_k(1.0, 1.0, 2, 3)
    with pytest.raises(ValueError):
        chern_density_k(1.0, 1.0, 2, 0)


def test_sigma_monomial_structure_symbolically():
    # every monomial of sigma_k in (A, B, C) has total degree k and A-degree
    # at most 2 (the radial eigenvalue has multiplicity two); checked on the
    # brute-force expansion, which the numeric tests pin sigma_k against
    import sympy

    A, B, C = sympy.symbols("A B C")
    n = 3
    lam = A + (n - 1) * B
    mu = B + sympy.Rational(n, 2) * C
    for k in range(1, 2 * n + 1):
        expr = sympy.expand(sigma_oracle(lam, mu, n, k))
        for monom in sympy.Poly(expr, A, B, C).monoms():
            assert sum(monom) == k
            assert monom[0] <= 2


# ---------------------------------------------------------------------------
# curvature of built metrics


@pytest.mark.parametrize("a", [0.3, 0.5, 0.8])
def test_rational_metric_curvature_closed_form(a):
    from cvlab import build_metric, polynomial_xi

    m = build_metric(polynomial_xi(a), 2)
    t = m.r[1:]
    A, B, C = abc_native(m, t)
    A0, B0, C0 = rational_abc(a, t)
    assert np.allclose(A, A0, rtol=1e-8, atol=1e-13)
    # B and C subtract the cumulative moment from xi*v; near the origin both
    # terms are O(t^2) while the quadrature carries absolute eps*v noise, so
    # a few digits cancel away.  1e-6 relative is the honest floor there.
    assert np.allclose(B, B0, rtol=1e-6, atol=1e-15)
    assert np.allclose(C, C0, rtol=1e-6, atol=1e-15)


def test_origin_limits_from_xi(poly05_n2):
    A, B, C = abc_native(poly05_n2, 0.0)
    # xi'(0) = a = 1/2, h(0) = 1: A = 1/2, B = A/2, C = A
    assert A == pytest.approx(0.5, rel=1e-6)
    assert B == pytest.approx(0.25, rel=1e-6)
    assert C == pytest.approx(0.5, rel=1e-6)


def test_origin_limits_from_f(yau_n3):
    # F''(0) = 0 for the step train: curvature vanishes at the origin
    A, B, C = abc_native(yau_n3, 0.0)
    assert A == 0.0 and B == 0.0 and C == 0.0


def test_curvature_nonnegative_for_valid_profiles(poly05_n2, yau_n3, s3_n2, lp_model):
    for m in (poly05_n2, yau_n3, s3_n2, lp_model):
        A, B, C = abc_native(m, m.native[1:])
        assert np.all(A >= -1e-12)
        assert np.all(B >= -1e-15)
        assert np.all(C >= -1e-15)


def test_cross_route_agreement_rational(poly05_n2):
    m = poly05_n2
    r = np.geomspace(1e-2, 1e6, 120)
    native = abc_at_r(m, r)
    x = np.sqrt(r * np.interp(r, m.r, m.h))
    via_x = abc_at_x(m, x)
    for direct, other in zip(native, via_x):
        assert np.all(np.abs(direct - other) <= 1e-5 * (1.0 + np.abs(direct)))


def test_cross_route_agreement_steps(yau_n3):
    m = yau_n3
    x = np.geomspace(0.5, 500.0, 200)
    native = abc_at_x(m, x)
    r = np.interp(x, m.x, m.r)
    via_r = abc_at_r(m, r)
    for direct, other in zip(native, via_r):
        assert np.all(np.abs(direct - other) <= 1e-5 * (1.0 + np.abs(direct)))


def test_abc_at_x_refuses_saturated_xi(s3_n2):
    with pytest.raises(ValueError):
        abc_at_x(s3_n2, np.array([0.5, 1.0]))


def test_s3_curvature_vanishes_radially_past_r0(s3_n2):
    m = s3_n2
    r = np.geomspace(1.5, 1e6, 50)
    A, _, _ = abc_at_r(m, r)
    assert np.all(A == 0.0)


def test_curvature_table_shape_and_consistency(poly05_n2):
    table = curvature_table(poly05_n2, rows=128)
    assert set(table) == {"r", "x", "A", "B", "C", "lambda", "mu", "scalar"}
    assert all(len(col) == 128 for col in table.values())
    lam, mu = ricci_eigenvalues(table["A"], table["B"], table["C"], poly05_n2.n)
    assert np.allclose(table["lambda"], lam, rtol=1e-12)
    assert np.allclose(table["mu"], mu, rtol=1e-12)
    assert np.all(np.isfinite(table["scalar"]))
