"""Radial self-duality equation on the punctured disk and the metrics built from it.

Conventions
-----------
The metric on the punctured unit disk is ``h = e^{2u} |dz|^2`` with
``u = u(s)``, ``s = log r``.  The coefficient ``a = q dz^2`` has ``|q|``
radial.  The harmonic-metric equation for ``θ_a`` with an orthogonal
splitting becomes

    u_ss = e^{2s} (4 e^{2u} - 4 |q|^2 e^{-2u}),

which for ``q = 0`` says that ``h`` has Gaussian curvature -4.  Its solution
with cusp data is ``u = -log(2 r log(1/r))``, the Poincaré metric normalised
to curvature exactly -4.

The deformed metric is ``h_a = a + h_c + ā`` with ``h_c = e^{2u} + |q|^2 e^{-2u}``
the ``dz dz̄`` coefficient; in real coordinates ``E dx^2 + 2F dx dy + G dy^2``
with ``E = h_c + 2 Re q``, ``G = h_c - 2 Re q``, ``F = -2 Im q``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.linalg import solve_banded

log = logging.getLogger(__name__)

__all__ = [
    "RadialGrid",
    "CoefficientModel",
    "RadialSolution",
    "MetricField",
    "SolverError",
    "NewtonConvergenceError",
    "DegenerateMetricError",
    "poincare_exact",
    "u_exact",
    "poincare_volume",
    "discrete_residual",
    "solve_selfduality",
    "build_h_a",
    "gauss_curvature_fd",
    "higgs_norm_field",
    "norm_log_exponent",
    "mutual_boundedness",
    "volume",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
]

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 30
LOG_HALF = math.log(0.5)


class SolverError(RuntimeError):
    pass


class NewtonConvergenceError(SolverError):
    def __init__(self, message: str, history: list[float]):
        super().__init__(message)
        self.history = history


class DegenerateMetricError(ValueError):
    def __init__(self, message: str, point: tuple[float, float] | float):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid in ``s = log r``."""

    s_min: float
    s_max: float
    node_count: int

    def __post_init__(self) -> None:
        if not self.s_min < self.s_max:
            raise ValueError("need s_min < s_max")
        if self.s_max > LOG_HALF + 1e-12:
            raise ValueError(f"s_max must be <= log(0.5), got {self.s_max}")
        if self.node_count < 3 or self.node_count % 2 == 0:
            raise ValueError(f"node_count must be odd and >= 3, got {self.node_count}")

    @classmethod
    def from_radii(cls, r_min: float, r_max: float, node_count: int) -> RadialGrid:
        if not 0 < r_min < r_max:
            raise ValueError("need 0 < r_min < r_max")
        return cls(math.log(r_min), math.log(r_max), node_count)

    @property
    def s(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.node_count)

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.s)

    @property
    def ds(self) -> float:
        return (self.s_max - self.s_min) / (self.node_count - 1)

    def refined(self) -> RadialGrid:
        """Same interval, half the spacing."""
        return RadialGrid(self.s_min, self.s_max, 2 * self.node_count - 1)

    def to_json(self) -> dict:
        return {
            "s_min": self.s_min,
            "s_max": self.s_max,
            "node_count": self.node_count,
            "r_min": math.exp(self.s_min),
            "r_max": math.exp(self.s_max),
        }


@dataclass(frozen=True)
class CoefficientModel:
    """Local form ``q(z)`` of the quadratic differential: ``0``, ``c`` or ``c / z``.

    ``c / z`` is the worst singularity a section of ``K^2 ⊗ ξ`` may have.
    """

    kind: str = "zero"
    c: complex = 0j

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "const", "pole"):
            raise ValueError(f"unknown coefficient model {self.kind!r}")
        object.__setattr__(self, "c", complex(self.c))
        if self.kind == "zero":
            object.__setattr__(self, "c", 0j)

    @classmethod
    def parse(cls, text: str) -> CoefficientModel:
        """``zero``, ``const:C`` or ``pole:C`` with ``C`` any Python complex literal."""
        if text == "zero":
            return cls("zero")
        kind, sep, value = text.partition(":")
        if not sep or kind not in ("const", "pole"):
            raise ValueError(f"bad coefficient model {text!r}; use zero, const:C or pole:C")
        return cls(kind, complex(value.replace(" ", "")))

    def q(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "zero":
            return np.zeros_like(z)
        if self.kind == "const":
            return np.full_like(z, self.c)
        return self.c / z

    def modulus(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "const":
            return np.full_like(r, abs(self.c))
        return abs(self.c) / r

    def __str__(self) -> str:
        return "zero" if self.kind == "zero" else f"{self.kind}:{self.c}"

    def to_json(self) -> dict:
        return {"kind": self.kind, "c": [self.c.real, self.c.imag]}


@dataclass(frozen=True, eq=False)
class RadialSolution:
    grid: RadialGrid
    u: np.ndarray
    q_model: CoefficientModel
    newton_iterations: int
    final_residual: float
    residual_history: tuple[float, ...] = field(default=())

    @property
    def s(self) -> np.ndarray:
        return self.grid.s

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def spline(self):
        """Quintic interpolant of ``u`` in ``s``."""
        return make_interp_spline(self.s, self.u, k=5)

    def to_json(self) -> dict:
        return {
            "grid": self.grid.to_json(),
            "u": [float(v) for v in self.u],
            "residual": float(self.final_residual),
            "iterations": int(self.newton_iterations),
            "q_model": self.q_model.to_json(),
        }


def poincare_exact(r: float) -> float:
    """Conformal factor ``lambda(r) = 1 / (2 r log(1/r))`` of the curvature -4 cusp metric."""
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    return 1.0 / (2.0 * r * math.log(1.0 / r))


def u_exact(s):
    """``log`` of :func:`poincare_exact` as a function of ``s = log r < 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(s >= 0):
        raise ValueError("s must be negative")
    return -math.log(2.0) - s - np.log(-s)


def poincare_volume(r_lo: float, r_hi: float) -> float:
    """Area of ``r_lo < |z| < r_hi`` for the cusp metric: ``(pi/2) (1/log(1/r_hi) - 1/log(1/r_lo))``."""
    return 0.5 * math.pi * (1.0 / math.log(1.0 / r_hi) - 1.0 / math.log(1.0 / r_lo))


def _source(s: np.ndarray, u: np.ndarray, Q2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side ``f`` and ``df/du``."""
    with np.errstate(over="raise"):
        try:
            ep = np.exp(2.0 * u)
            em = np.exp(-2.0 * u)
        except FloatingPointError as exc:
            raise SolverError("e^{2u} overflowed; the grid or boundary data are unsuitable") from exc
    w = np.exp(2.0 * s)
    f = w * (4.0 * ep - 4.0 * Q2 * em)
    df = w * (8.0 * ep + 8.0 * Q2 * em)
    return f, df


def discrete_residual(grid: RadialGrid, u: np.ndarray, q_model: CoefficientModel) -> np.ndarray:
    """Stencil residual ``u[i-1] - 2u[i] + u[i+1] - ds^2 f_i`` at interior nodes."""
    s = grid.s
    Q2 = q_model.modulus(np.exp(s)) ** 2
    f, _ = _source(s, u, Q2)
    return u[:-2] - 2.0 * u[1:-1] + u[2:] - grid.ds**2 * f[1:-1]


def _initial_iterate(grid: RadialGrid, bc: tuple[float, float]) -> np.ndarray:
    s = grid.s
    ue = u_exact(s)
    t = (s - s[0]) / (s[-1] - s[0])
    return ue + (bc[0] - ue[0]) * (1.0 - t) + (bc[1] - ue[-1]) * t


def solve_selfduality(
    grid: RadialGrid,
    q_model: CoefficientModel,
    bc: tuple[float, float] | None = None,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    initial: np.ndarray | None = None,
) -> RadialSolution:
    """Damped Newton on the centered three-point discretisation with Dirichlet data.

    ``bc`` defaults to the cusp values ``u_exact`` at both ends.  The damping
    factor is halved whenever a step would increase the residual.
    """
    s = grid.s
    if bc is None:
        bc = (float(u_exact(s[0])), float(u_exact(s[-1])))
    if not all(math.isfinite(b) for b in bc):
        raise ValueError("boundary values must be finite")
    u = _initial_iterate(grid, bc) if initial is None else np.array(initial, dtype=float)
    u[0], u[-1] = bc
    Q2 = q_model.modulus(np.exp(s)) ** 2
    h2 = grid.ds**2
    n_int = grid.node_count - 2

    res = discrete_residual(grid, u, q_model)
    history = [float(np.max(np.abs(res)))]
    it = 0
    while True:
        _, df = _source(s, u, Q2)
        ab = np.zeros((3, n_int))
        ab[0, 1:] = 1.0
        ab[1, :] = -2.0 - h2 * df[1:-1]
        ab[2, :-1] = 1.0
        step = solve_banded((1, 1), ab, -res)
        # both the residual and the Newton update must be small
        if history[-1] < tol and float(np.max(np.abs(step))) < tol:
            break
        if it >= max_iter:
            raise NewtonConvergenceError(
                f"Newton did not converge in {max_iter} iterations (residual {history[-1]:.3e})", history
            )
        damping = 1.0
        while True:
            trial = u.copy()
            trial[1:-1] += damping * step
            try:
                trial_res = discrete_residual(grid, trial, q_model)
                trial_norm = float(np.max(np.abs(trial_res)))
            except SolverError:
                trial_norm = math.inf
            # at the roundoff floor a full step need not lower the residual
            if trial_norm < history[-1] or trial_norm < tol or damping < 1e-8:
                break
            damping *= 0.5
        if not math.isfinite(trial_norm):
            raise SolverError("Newton step left the representable range")
        u, res = trial, trial_res
        it += 1
        history.append(trial_norm)
        log.debug("newton it=%d damping=%g residual=%.3e", it, damping, trial_norm)
    return RadialSolution(grid, u, q_model, it, history[-1], tuple(history))


@dataclass(frozen=True, eq=False)
class MetricField:
    """Metric ``E dx^2 + 2F dx dy + G dy^2`` defined on a rectangle."""

    evaluate: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]
    patch: tuple[float, float, float, float] | None = None  # (x0, x1, y0, y1)

    def __call__(self, x, y):
        return self.evaluate(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def sample_points(self, per_side: int, margin: float) -> list[tuple[float, float]]:
        x0, x1, y0, y1 = self.patch
        xs = np.linspace(x0 + margin, x1 - margin, per_side)
        ys = np.linspace(y0 + margin, y1 - margin, per_side)
        return [(float(x), float(y)) for x in xs for y in ys]


def _patch_radii(patch: tuple[float, float, float, float]) -> tuple[float, float]:
    x0, x1, y0, y1 = patch
    if not (x0 < x1 and y0 < y1):
        raise ValueError("patch must have x0 < x1 and y0 < y1")
    # nearest point of the rectangle to the origin
    nx = min(max(0.0, x0), x1)
    ny = min(max(0.0, y0), y1)
    r_lo = math.hypot(nx, ny)
    r_hi = max(math.hypot(x, y) for x in (x0, x1) for y in (y0, y1))
    return r_lo, r_hi


def build_h_a(sol: RadialSolution, patch: tuple[float, float, float, float]) -> MetricField:
    """The metric ``h_a`` on ``patch``; refuses patches where ``||rho(a)|| >= 1``."""
    r_lo, r_hi = _patch_radii(patch)
    r_grid = sol.r
    if r_lo < r_grid[0] or r_hi > r_grid[-1]:
        raise ValueError(
            f"patch radii [{r_lo:.4g}, {r_hi:.4g}] leave the solved annulus "
            f"[{r_grid[0]:.4g}, {r_grid[-1]:.4g}]"
        )
    spl = sol.spline()
    qm = sol.q_model

    # positivity on the grid nodes covering the patch, then on a sampling of the patch itself
    norm = higgs_norm_field(sol)
    inside = (r_grid >= r_lo) & (r_grid <= r_hi)
    if np.any(norm[inside] >= 1.0):
        i = int(np.flatnonzero(inside & (norm >= 1.0))[0])
        raise DegenerateMetricError(
            f"degenerate metric: ||rho(a)|| = {norm[i]:.6g} >= 1 at r = {r_grid[i]:.6g}", float(r_grid[i])
        )
    xs = np.linspace(patch[0], patch[1], 41)
    ys = np.linspace(patch[2], patch[3], 41)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    R = np.hypot(X, Y)
    sample_norm = qm.modulus(R) * np.exp(-2.0 * spl(np.log(R)))
    if np.any(sample_norm >= 1.0):
        i, j = np.unravel_index(int(np.argmax(sample_norm)), sample_norm.shape)
        pt = (float(X[i, j]), float(Y[i, j]))
        raise DegenerateMetricError(f"degenerate metric: ||rho(a)|| = {sample_norm[i, j]:.6g} >= 1 at {pt}", pt)

    def evaluate(x: np.ndarray, y: np.ndarray):
        z = x + 1j * y
        r = np.abs(z)
        u = spl(np.log(r))
        q = qm.q(z)
        hc = np.exp(2.0 * u) + np.abs(q) ** 2 * np.exp(-2.0 * u)
        return hc + 2.0 * q.real, -2.0 * q.imag, hc - 2.0 * q.real

    return MetricField(evaluate, tuple(float(p) for p in patch))


def gauss_curvature_fd(metric: MetricField, x: float, y: float, step: float) -> float:
    """Gaussian curvature from centered differences of ``E, F, G`` (Brioschi's formula).

    Second order in ``step``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if metric.patch is not None:
        x0, x1, y0, y1 = metric.patch
        if min(x - x0, x1 - x, y - y0, y1 - y) < 2 * step:
            raise ValueError(f"point ({x}, {y}) is within two steps of the patch boundary")
    h = step
    offs = np.array([-h, 0.0, h])
    X = x + offs[:, None] + 0.0 * offs[None, :]
    Y = y + 0.0 * offs[:, None] + offs[None, :]
    E, F, G = (np.broadcast_to(np.asarray(a, dtype=float), X.shape) for a in metric(X, Y))
    det_stencil = E * G - F * F
    if np.any(det_stencil <= 0) or np.any(E <= 0):
        raise DegenerateMetricError(f"metric is singular on the stencil at ({x}, {y})", (x, y))

    def d_x(A):
        return (A[2, 1] - A[0, 1]) / (2 * h)

    def d_y(A):
        return (A[1, 2] - A[1, 0]) / (2 * h)

    def d_xx(A):
        return (A[2, 1] - 2 * A[1, 1] + A[0, 1]) / h**2

    def d_yy(A):
        return (A[1, 2] - 2 * A[1, 1] + A[1, 0]) / h**2

    def d_xy(A):
        return (A[2, 2] - A[2, 0] - A[0, 2] + A[0, 0]) / (4 * h**2)

    e, f, g = E[1, 1], F[1, 1], G[1, 1]
    Eu, Ev, Fu, Fv, Gu, Gv = d_x(E), d_y(E), d_x(F), d_y(F), d_x(G), d_y(G)
    a = np.array([
        [-0.5 * d_yy(E) + d_xy(F) - 0.5 * d_xx(G), 0.5 * Eu, Fu - 0.5 * Ev],
        [Fv - 0.5 * Gu, e, f],
        [0.5 * Gv, f, g],
    ])
    b = np.array([
        [0.0, 0.5 * Ev, 0.5 * Gu],
        [0.5 * Ev, e, f],
        [0.5 * Gu, f, g],
    ])
    return float((np.linalg.det(a) - np.linalg.det(b)) / (e * g - f * f) ** 2)


def higgs_norm_field(sol: RadialSolution) -> np.ndarray:
    """Pointwise norm ``|q| e^{-2u}`` of the off-diagonal Higgs entry at each node."""
    return sol.q_model.modulus(sol.r) * np.exp(-2.0 * sol.u)


def norm_log_exponent(sol: RadialSolution, inner_nodes: int = 200) -> dict[str, float]:
    """Least-squares exponents of ``||rho(a)||`` near the puncture.

    ``r_slope`` fits ``log||rho|| ~ slope * log r``; ``log_power`` fits
    ``||rho|| / r ~ |log r|^power``.  Reported, not asserted.
    """
    norm = higgs_norm_field(sol)[:inner_nodes]
    s = sol.s[:inner_nodes]
    if np.any(norm <= 0):
        return {"r_slope": float("nan"), "log_power": float("nan")}
    r_slope = float(np.polyfit(s, np.log(norm), 1)[0])
    log_power = float(np.polyfit(np.log(-s), np.log(norm) - s, 1)[0])
    return {"r_slope": r_slope, "log_power": log_power}


def mutual_boundedness(sol_a: RadialSolution, sol_0: RadialSolution) -> tuple[float, float]:
    """Extremes over the grid of ``e^{2u_a - 2u_0}``."""
    if sol_a.grid != sol_0.grid:
        raise ValueError("solutions must share a grid")
    ratio = np.exp(2.0 * (sol_a.u - sol_0.u))
    return float(ratio.min()), float(ratio.max())


def volume(sol: RadialSolution, r_lo: float, r_hi: float) -> float:
    """Area of ``r_lo < |z| < r_hi`` for ``h_a``, trapezoid rule in ``s``.

    The area density is ``sqrt(EG - F^2) = |e^{2u} - |q|^2 e^{-2u}|`` and
    ``dA = density * r^2 ds dphi``.
    """
    s = sol.s
    s_lo, s_hi = math.log(r_lo), math.log(r_hi)
    if s_lo < s[0] - 1e-12 or s_hi > s[-1] + 1e-12 or not s_lo < s_hi:
        raise ValueError("integration range must lie inside the grid")
    Q2 = sol.q_model.modulus(sol.r) ** 2
    dens = np.abs(np.exp(2.0 * sol.u) - Q2 * np.exp(-2.0 * sol.u)) * np.exp(2.0 * s)
    keep = (s > s_lo) & (s < s_hi)
    ss = np.concatenate(([s_lo], s[keep], [s_hi]))
    vals = np.concatenate(([np.interp(s_lo, s, dens)], dens[keep], [np.interp(s_hi, s, dens)]))
    return float(2.0 * math.pi * np.trapezoid(vals, ss))
