from __future__ import annotations

import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from higgsteich import metricsolve as ms

GRID = ms.RadialGrid.from_radii(1e-3, 0.5, 2001)
ZERO = ms.CoefficientModel()


@pytest.fixture(scope="module")
def sol0():
    return ms.solve_selfduality(GRID, ZERO)


@pytest.fixture(scope="module")
def sol_const():
    return ms.solve_selfduality(GRID, ms.CoefficientModel.parse("const:0.05"))


# --- closed forms -------------------------------------------------------------


def test_poincare_values():
    assert ms.poincare_exact(math.exp(-1)) == pytest.approx(math.e / 2, rel=1e-14)
    assert ms.poincare_exact(0.1) == pytest.approx(2.1714724095162588, rel=1e-14)
    with pytest.raises(ValueError):
        ms.poincare_exact(1.0)
    with pytest.raises(ValueError):
        ms.u_exact(0.0)


def test_poincare_curvature_symbolic():
    r = sympy.Symbol("r", positive=True)
    lam = 1 / (2 * r * sympy.log(1 / r))
    # K = -(1/lam^2) Laplacian(log lam), radial Laplacian f'' + f'/r
    f = sympy.log(lam)
    K = -(sympy.diff(f, r, 2) + sympy.diff(f, r) / r) / lam**2
    assert sympy.simplify(K) == -4


def test_u_exact_solves_ode_symbolically():
    s = sympy.Symbol("s", negative=True)
    u = -sympy.log(2) - s - sympy.log(-s)
    assert sympy.simplify(sympy.diff(u, s, 2) - sympy.exp(2 * s) * 4 * sympy.exp(2 * u)) == 0


def test_volume_closed_form():
    r_lo, r_hi = 1e-3, 0.5
    got = ms.poincare_volume(r_lo, r_hi)
    # oracle: integrate lambda^2 over the annulus numerically
    from scipy.integrate import quad

    val, _ = quad(lambda r: 2 * math.pi * r * ms.poincare_exact(r) ** 2, r_lo, r_hi, limit=200)
    assert got == pytest.approx(val, rel=1e-10)
    assert got == pytest.approx((math.pi / 2) * (1 / math.log(2) - 1 / math.log(1000)), rel=1e-14)


# --- grids and models ---------------------------------------------------------


def test_grid_validation():
    assert GRID.refined().node_count == 4001
    assert GRID.refined().ds == pytest.approx(GRID.ds / 2)
    with pytest.raises(ValueError):
        ms.RadialGrid.from_radii(1e-3, 0.9, 101)
    with pytest.raises(ValueError):
        ms.RadialGrid.from_radii(1e-3, 0.5, 100)
    with pytest.raises(ValueError):
        ms.RadialGrid.from_radii(0.0, 0.5, 101)


def test_coefficient_model_parse():
    m = ms.CoefficientModel.parse("pole:0.05")
    assert m.kind == "pole" and m.c == 0.05
    assert m.modulus(0.5) == pytest.approx(0.1)
    assert ms.CoefficientModel.parse("const:0.01+0.02j").c == complex(0.01, 0.02)
    assert ms.CoefficientModel.parse("zero").modulus(0.3) == 0
    for bad in ("const", "foo:1", "const:abc"):
        with pytest.raises(ValueError):
            ms.CoefficientModel.parse(bad)


# --- solver -------------------------------------------------------------------


def test_exact_data_is_nearly_fixed():
    # with the exact solution as initial guess, Newton only removes the truncation error
    sol = ms.solve_selfduality(GRID, ZERO, initial=ms.u_exact(GRID.s), tol=1e-11)
    assert sol.newton_iterations <= 2
    assert np.max(np.abs(ms.discrete_residual(GRID, sol.u, ZERO))) < 1e-10


def test_q0_accuracy(sol0):
    err = np.max(np.abs(sol0.u - ms.u_exact(GRID.s)))
    assert err < 1e-6
    assert sol0.newton_iterations <= 30
    assert sol0.final_residual < 1e-9


def test_q0_second_order(sol0):
    fine = ms.solve_selfduality(GRID.refined(), ZERO)
    e1 = np.max(np.abs(sol0.u - ms.u_exact(GRID.s)))
    e2 = np.max(np.abs(fine.u - ms.u_exact(fine.grid.s)))
    assert 3.5 <= e1 / e2 <= 4.5


def test_residual_history_decreases(sol_const):
    h = sol_const.residual_history
    assert h[-1] < 1e-9
    assert all(b <= a or b < 1e-9 for a, b in zip(h, h[1:]))


def test_newton_failure_reports_history():
    with pytest.raises(ms.NewtonConvergenceError) as exc:
        ms.solve_selfduality(GRID, ZERO, max_iter=0, initial=np.zeros(GRID.node_count))
    assert len(exc.value.history) == 1


def test_bad_boundary_data():
    with pytest.raises(ValueError):
        ms.solve_selfduality(GRID, ZERO, bc=(math.nan, 0.0))


# --- curvature ----------------------------------------------------------------


def _const_metric(E, F, G):
    return ms.MetricField(lambda x, y: (np.full_like(x, E), np.full_like(x, F), np.full_like(x, G)))


def test_curvature_of_known_metrics():
    assert ms.gauss_curvature_fd(_const_metric(2.0, 0.3, 1.0), 0.1, 0.2, 1e-3) == pytest.approx(0.0, abs=1e-6)

    def sphere(x, y):
        c = 4.0 / (1.0 + x * x + y * y) ** 2
        return c, 0.0 * x, c

    assert ms.gauss_curvature_fd(ms.MetricField(sphere), 0.3, -0.2, 1e-3) == pytest.approx(1.0, abs=1e-5)

    def cusp(x, y):
        lam2 = 1.0 / (2.0 * np.hypot(x, y) * np.log(1.0 / np.hypot(x, y))) ** 2
        return lam2, 0.0 * x, lam2

    assert ms.gauss_curvature_fd(ms.MetricField(cusp), 0.1, 0.15, 1e-3) == pytest.approx(-4.0, abs=5e-4)


def test_curvature_non_orthogonal_against_sympy():
    x, y = sympy.symbols("x y")
    E, F, G = 1 + x**2, x * y / 2, 1 + y**2 + x * y
    Eu, Ev, Fu, Fv, Gu, Gv = (sympy.diff(a, v) for a in (E, F, G) for v in (x, y))
    A = sympy.Matrix([
        [-sympy.diff(E, y, 2) / 2 + sympy.diff(F, x, y) - sympy.diff(G, x, 2) / 2, Eu / 2, Fu - Ev / 2],
        [Fv - Gu / 2, E, F],
        [Gv / 2, F, G],
    ])
    B = sympy.Matrix([[0, Ev / 2, Gu / 2], [Ev / 2, E, F], [Gu / 2, F, G]])
    K = (A.det() - B.det()) / (E * G - F**2) ** 2
    want = float(K.subs({x: 0.3, y: -0.4}))
    f = sympy.lambdify((x, y), (E, F, G), "numpy")
    metric = ms.MetricField(lambda X, Y: tuple(np.broadcast_to(v, np.shape(X)) for v in f(X, Y)))
    assert ms.gauss_curvature_fd(metric, 0.3, -0.4, 1e-3) == pytest.approx(want, abs=1e-5)


def test_h_a_curvature_symbolic_const_q():
    # curvature of e^{2u}|dz|^2 + q dz^2 + conj at a point, with u a local quadratic in s
    # whose second derivative is fixed by the ODE there; the result must be -4
    x, y = sympy.symbols("x y", real=True)
    u0, u1 = sympy.symbols("u0 u1", real=True)
    c = sympy.Rational(1, 20)
    pt = {x: sympy.Rational(1, 7), y: sympy.Rational(1, 9)}
    s = sympy.log(sympy.sqrt(x**2 + y**2))
    s0 = s.subs(pt)
    u2 = sympy.exp(2 * s0) * (4 * sympy.exp(2 * u0) - 4 * c**2 * sympy.exp(-2 * u0))
    u = u0 + u1 * (s - s0) + u2 * (s - s0) ** 2 / 2
    hc = sympy.exp(2 * u) + c**2 * sympy.exp(-2 * u)
    E, G = hc + 2 * c, hc - 2 * c
    sq = sympy.sqrt(E * G)
    K = -(sympy.diff(sympy.diff(E, y) / sq, y) + sympy.diff(sympy.diff(G, x) / sq, x)) / (2 * sq)
    Kp = K.subs(pt)
    for vals in ({u0: 1.3, u1: -0.7}, {u0: 2.0, u1: 0.4}):
        assert float(Kp.subs(vals).evalf(30)) == pytest.approx(-4.0, abs=1e-10)


@pytest.mark.parametrize("model", ["zero", "const:0.05", "pole:0.05"])
def test_h_a_curvature_numeric(model):
    sol = ms.solve_selfduality(GRID, ms.CoefficientModel.parse(model))
    metric = ms.build_h_a(sol, (0.05, 0.25, 0.05, 0.25))
    pts = metric.sample_points(5, 0.01)
    ks = [ms.gauss_curvature_fd(metric, x, y, 1e-3) for x, y in pts]
    assert max(abs(k + 4) for k in ks) < 1e-2
    x, y = pts[12]
    k1, k2, k3 = (ms.gauss_curvature_fd(metric, x, y, h) for h in (4e-3, 2e-3, 1e-3))
    assert 3.0 < (k1 - k2) / (k2 - k3) < 5.0


def test_build_h_a_guards(sol0):
    with pytest.raises(ValueError, match="solved annulus"):
        ms.build_h_a(sol0, (0.3, 0.6, 0.0, 0.1))
    big = ms.solve_selfduality(GRID, ms.CoefficientModel.parse("const:5"))
    with pytest.raises(ms.DegenerateMetricError):
        ms.build_h_a(big, (0.05, 0.25, 0.05, 0.25))
    metric = ms.build_h_a(sol0, (0.05, 0.25, 0.05, 0.25))
    with pytest.raises(ValueError, match="two steps"):
        ms.gauss_curvature_fd(metric, 0.05, 0.1, 1e-3)


# --- norms, volume, boundedness ----------------------------------------------


def test_norm_matches_poincare_estimate(sol_const):
    norm = ms.higgs_norm_field(sol_const)
    i = int(np.argmin(np.abs(GRID.r - 0.1)))
    r = GRID.r[i]
    oracle = 0.05 * (2 * r * math.log(1 / r)) ** 2  # |q| / lambda^2 for the cusp metric
    assert norm[i] == pytest.approx(oracle, rel=1e-3)
    assert np.all(norm < 1)


def test_pole_norm_decays():
    grid = ms.RadialGrid.from_radii(1e-4, 0.5, 4001)
    sol = ms.solve_selfduality(grid, ms.CoefficientModel.parse("pole:0.05"))
    norm = ms.higgs_norm_field(sol)
    below = grid.r < math.exp(-2)
    assert np.all(np.diff(norm[below]) > 0)
    assert norm[0] < 1e-2
    fit = ms.norm_log_exponent(sol)
    assert fit["log_power"] == pytest.approx(2.0, abs=0.05)


def test_volume_q0(sol0):
    v = ms.volume(sol0, 1e-3, 0.5)
    assert v == pytest.approx(ms.poincare_volume(1e-3, 0.5), rel=1e-3)
    assert v == pytest.approx(2.038793350862563, rel=1e-9)
    with pytest.raises(ValueError):
        ms.volume(sol0, 1e-4, 0.5)


def test_mutual_boundedness_regression(sol0, sol_const):
    lo, hi = ms.mutual_boundedness(sol_const, sol0)
    assert lo == pytest.approx(1.0, abs=1e-12)
    assert hi == pytest.approx(1.0002119989766705, rel=1e-9)
    with pytest.raises(ValueError):
        ms.mutual_boundedness(sol_const, ms.solve_selfduality(GRID.refined(), ZERO))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 0.05))
def test_constant_q_pushes_metric_up(c):
    # larger |q| means a larger source deficit, so u_a >= u_0 with equal boundary data
    grid = ms.RadialGrid.from_radii(1e-3, 0.5, 401)
    a = ms.solve_selfduality(grid, ms.CoefficientModel("const", c))
    b = ms.solve_selfduality(grid, ZERO)
    assert np.all(a.u - b.u >= -1e-12)
    assert np.all(ms.higgs_norm_field(a) < 1)
