from __future__ import annotations

from math import comb

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from higgsteich.repdim import (
    dimension_report,
    hitchin_base_dim_real,
    hitchin_base_terms,
    integer_rank,
    regular_unipotent,
    rep_variety_dim,
    sympower_unipotent,
    teichmuller_component_dim,
    unipotent_orbit_dim,
)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(lambda r: st.lists(st.lists(st.integers(-5, 5), min_size=4, max_size=4), min_size=r, max_size=r)))
def test_integer_rank_matches_sympy(rows):
    assert integer_rank(rows) == sympy.Matrix(rows).rank()


def test_integer_rank_low_rank():
    rows = [[1, 2, 3], [2, 4, 6], [0, 0, 0]]
    assert integer_rank(rows) == 1
    assert integer_rank([]) == 0


@pytest.mark.parametrize("k", range(2, 13))
def test_orbit_dim(k):
    assert unipotent_orbit_dim(k) == k * (k - 1)


@pytest.mark.parametrize("k", range(2, 6))
def test_centralizer_via_sympy(k):
    # the centralizer of a regular unipotent in gl(k) has dimension k; in sl(k), k - 1
    U = sympy.Matrix(regular_unipotent(k))
    xs = sympy.symbols(f"x0:{k * k}")
    X = sympy.Matrix(k, k, xs)
    eqs = list(X * U - U * X) + [X.trace()]
    A, _ = sympy.linear_eq_to_matrix(eqs, xs)
    assert len(A.nullspace()) == k - 1
    assert unipotent_orbit_dim(k) == (k * k - 1) - (k - 1)


def test_orbit_dim_range():
    with pytest.raises(ValueError):
        unipotent_orbit_dim(13)
    with pytest.raises(ValueError):
        unipotent_orbit_dim(1)


@pytest.mark.parametrize("k", range(2, 7))
def test_sympower(k):
    M = sympower_unipotent(k)
    # oracle: expand x^{k-1-j} (x + y)^j and read off the coefficient of x^{k-1-i} y^i
    x, y = sympy.symbols("x y")
    for j in range(k):
        poly = sympy.Poly(sympy.expand(x ** (k - 1 - j) * (x + y) ** j), x, y)
        for i in range(k):
            assert M[i][j] == poly.coeff_monomial(x ** (k - 1 - i) * y**i)
    N = [[M[i][j] - (i == j) for j in range(k)] for i in range(k)]
    assert integer_rank(N) == k - 1
    assert sympy.Matrix(M).det() == 1
    assert M[0][k - 1] == comb(k - 1, 0)


def test_dimension_examples():
    for g, n in [(2, 1), (0, 3), (3, 5)]:
        assert teichmuller_component_dim(g, n, 2) == 2 * (3 * g - 3 + n)
    assert hitchin_base_dim_real(2, 1, 3) == 22
    assert teichmuller_component_dim(2, 1, 3) == 22
    assert rep_variety_dim(2, 1, 3) == 22
    assert dimension_report(5, 4, 7).closed_form_dim == 552
    assert hitchin_base_terms(2, 1, 3) == [(2, 8), (3, 14)]


def test_per_j_term_formula():
    # 2 h0(K^j xi^{j-1}) = 2(2j-1)(g-1) + 2(j-1)n
    for g, n, k in [(2, 1, 5), (0, 7, 6), (4, 0, 4)]:
        for j, t in hitchin_base_terms(g, n, k):
            assert t == 2 * (2 * j - 1) * (g - 1) + 2 * (j - 1) * n


@pytest.mark.parametrize("g,n", [(g, n) for g in range(6) for n in range(1, 9) if 2 * g - 2 + n > 0])
def test_triple_agreement(g, n):
    for k in range(2, 11):
        r = dimension_report(g, n, k)
        assert r.agree, r


def test_errors():
    with pytest.raises(ValueError, match="n >= 1"):
        rep_variety_dim(2, 0, 3)
    with pytest.raises(ValueError, match="not hyperbolic"):
        hitchin_base_dim_real(0, 2, 3)
    with pytest.raises(ValueError):
        teichmuller_component_dim(2, 1, 1)


def test_closed_surface_two_counts_agree():
    for g in range(2, 6):
        for k in range(2, 9):
            assert hitchin_base_dim_real(g, 0, k) == teichmuller_component_dim(g, 0, k)


def test_orbit_dim_rejects_float():
    unipotent_orbit_dim(3)
    with pytest.raises(ValueError):
        unipotent_orbit_dim(3.0)
