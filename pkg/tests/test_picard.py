from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from higgsteich.picard import (
    IncompatibleSurfaceError,
    LineBundleClass,
    SpecialRangeError,
    SurfaceData,
    degree,
    dual,
    h0_nonspecial,
    power,
    tensor,
)

surfaces = st.builds(SurfaceData, st.integers(0, 8), st.integers(0, 12))
exps = st.integers(-10**6, 10**6)


def bundles_on(s: SurfaceData):
    return st.builds(LineBundleClass, exps, exps, st.just(s))


def test_hyperbolicity_flag():
    assert SurfaceData(2, 0).hyperbolic
    assert SurfaceData(0, 3).hyperbolic
    assert not SurfaceData(0, 2).hyperbolic
    assert not SurfaceData(1, 0).hyperbolic
    with pytest.raises(ValueError):
        SurfaceData(-1, 2)


def test_surface_is_immutable():
    s = SurfaceData(2, 1)
    with pytest.raises(AttributeError):
        s.genus = 3


def test_degree_examples():
    assert degree(SurfaceData(2, 0).L) == 1
    s = SurfaceData(2, 3)
    assert degree(dual(s.L * s.xi)) == -4 == 1 - 2 - 3
    s = SurfaceData(2, 1)
    b = s.bundle(4, 1)
    # additivity oracle: 4 deg L + deg xi
    assert degree(b) == 4 * degree(s.L) + degree(s.xi) == 5


def test_lattice_operations():
    s = SurfaceData(3, 2)
    assert tensor(s.L, s.L) == s.K
    assert dual(s.bundle(-1, -1)) == s.L * s.xi
    assert power(s.xi, 3).exponents == (0, 3)
    assert ~~s.bundle(5, -7) == s.bundle(5, -7)


def test_surface_mismatch():
    with pytest.raises(IncompatibleSurfaceError):
        tensor(SurfaceData(2, 1).L, SurfaceData(2, 2).L)


@given(surfaces.flatmap(lambda s: st.tuples(bundles_on(s), bundles_on(s), bundles_on(s))), st.integers(-50, 50))
def test_degree_is_homomorphism(triple, m):
    a, b, c = triple
    assert degree(tensor(a, b)) == degree(a) + degree(b)
    assert degree(power(a, m)) == m * degree(a)
    assert degree(dual(a)) == -degree(a)
    assert tensor(a, b) == tensor(b, a)
    assert tensor(tensor(a, b), c) == tensor(a, tensor(b, c))
    assert dual(dual(a)) == a


def test_h0_examples():
    s = SurfaceData(2, 1)
    assert h0_nonspecial(s.bundle(4, 1)) == 4
    # j = 3 term of the dimension sum: 2 h0(K^3 xi^2) = 2(2*3-1)(g-1) + 2(3-1)n
    assert degree(s.bundle(6, 2)) == 8
    assert h0_nonspecial(s.bundle(6, 2)) == 7
    assert 2 * 7 == 2 * (2 * 3 - 1) * (2 - 1) + 2 * (3 - 1) * 1
    with pytest.raises(SpecialRangeError):
        h0_nonspecial(SurfaceData(2, 0).K)


@given(st.integers(0, 8), st.integers(0, 12), st.integers(2, 15))
def test_h0_of_coefficient_bundles(g, n, j):
    s = SurfaceData(g, n)
    if not s.hyperbolic:
        return
    assert h0_nonspecial(s.bundle(2 * j, j - 1)) == (2 * j - 1) * (g - 1) + (j - 1) * n


def test_json_shape():
    assert SurfaceData(2, 3).bundle(-1, -1).to_json() == {"l_exp": -1, "xi_exp": -1, "degree": -4}
