"""Invariant battery behind ``higgsteich verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import higgs, metricsolve as ms
from .parabolic import build_E, build_W, par_dual
from .picard import SurfaceData
from .repdim import (
    dimension_report,
    integer_rank,
    sympower_unipotent,
    teichmuller_component_dim,
    unipotent_orbit_dim,
)

__all__ = ["CheckResult", "Tolerances", "SUITES", "run_suite", "sweep_surfaces"]


@dataclass(frozen=True)
class Tolerances:
    solver_residual: float = ms.DEFAULT_TOL
    pde_accuracy: float = 1e-6
    order_factor: tuple[float, float] = (3.5, 4.5)
    curvature: float = 1e-2
    curvature_step: float = 1e-3
    volume_rel: float = 1e-3
    boundedness_rel: float = 1e-2
    hitchin_rel: float = 1e-12

    def to_json(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


@dataclass
class CheckResult:
    name: str
    passed: bool
    provenance: str
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "provenance": self.provenance, "detail": self.detail}


def sweep_surfaces(g_max: int = 5, n_max: int = 8, n_min: int = 0):
    for g in range(g_max + 1):
        for n in range(n_min, n_max + 1):
            yield SurfaceData(g, n)


# --- algebra ---------------------------------------------------------------


def check_parabolic_degrees(tol: Tolerances, seed: int) -> CheckResult:
    bad = []
    for s in sweep_surfaces():
        if not s.hyperbolic:
            continue
        if build_E(s).par_degree != 0:
            bad.append((s.genus, s.punctures, 2))
        for k in range(2, 9):
            W = build_W(s, k)
            if W.par_degree != 0 or not par_dual(W).same_as(W):
                bad.append((s.genus, s.punctures, k))
    return CheckResult("parabolic_degree_zero", not bad, "exact", {"failures": bad})


def check_stability_boundary(tol: Tolerances, seed: int) -> CheckResult:
    bad = []
    theta = higgs.companion_higgs(2, [higgs.ZERO])
    for s in sweep_surfaces():
        v = higgs.is_parabolic_stable(build_E(s), theta)
        w = v.witnesses
        expected = 1 - s.genus - s.punctures / 2
        ok = v.stable == s.hyperbolic and len(w) == 1 and float(w[0].par_degree) == expected
        if not ok:
            bad.append((s.genus, s.punctures))
    return CheckResult("stability_iff_hyperbolic", not bad, "exact", {"failures": bad})


def check_invariant_negativity(tol: Tolerances, seed: int) -> CheckResult:
    bad = []
    for s in sweep_surfaces():
        if not s.hyperbolic:
            continue
        for k in range(2, 9):
            W = build_W(s, k)
            h = higgs.companion_higgs(k, [higgs.ZERO] * (k - 1))
            subs = higgs.invariant_subbundles(h, W)
            filtration = [frozenset(range(i, k)) for i in range(k - 1, 0, -1)]
            v = higgs.is_parabolic_stable(W, h)
            if subs != filtration or not v.stable or any(w.par_degree >= 0 for w in v.witnesses):
                bad.append((s.genus, s.punctures, k))
    return CheckResult("invariant_subbundles_negative", not bad, "exact", {"failures": bad})


def _random_field(rng: np.random.Generator, s: SurfaceData, k: int) -> higgs.CompanionHiggsField:
    coeffs = []
    for j in range(2, k + 1):
        if rng.random() < 0.2:
            coeffs.append(higgs.ZERO)
            continue
        v = complex(rng.normal(), rng.normal())
        coeffs.append(higgs.coefficient_section(s, j, samples=[v], vanish_order_at_D=int(rng.integers(0, 3))))
    return higgs.companion_higgs(k, coeffs, surface=s)


def check_residue_invariance(tol: Tolerances, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    s = SurfaceData(2, 3)
    bad = 0
    for k in range(2, 7):
        N = np.eye(k, k, 1, dtype=np.int64)
        for _ in range(1000):
            if not np.array_equal(higgs.residue_at(_random_field(rng, s, k)), N):
                bad += 1
    return CheckResult("residue_invariance", bad == 0, "exact", {"draws": 5000, "failures": bad})


def check_hitchin_section(tol: Tolerances, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for k in range(2, 7):
        for _ in range(1000):
            a = rng.normal(size=k - 1) + 1j * rng.normal(size=k - 1)
            rec = np.array(higgs.char_poly_coefficients(higgs.companion_matrix(list(a))))
            worst = max(worst, float(np.max(np.abs(rec - a) / np.abs(a))))
    return CheckResult(
        "hitchin_section_recovery", worst < tol.hitchin_rel, f"numeric({tol.hitchin_rel:g})", {"max_rel_error": worst}
    )


# --- dimensions --------------------------------------------------------------


def check_triple_agreement(tol: Tolerances, seed: int) -> CheckResult:
    bad = []
    for s in sweep_surfaces(n_min=1):
        if not s.hyperbolic:
            continue
        for k in range(2, 11):
            rep = dimension_report(s.genus, s.punctures, k)
            if not rep.agree:
                bad.append(rep.to_json())
        if teichmuller_component_dim(s.genus, s.punctures, 2) != 2 * (3 * s.genus - 3 + s.punctures):
            bad.append({"k2": (s.genus, s.punctures)})
    ok = not bad and dimension_report(2, 1, 3).closed_form_dim == 22
    return CheckResult("dimension_triple_agreement", ok, "exact", {"failures": bad})


def check_lie_oracles(tol: Tolerances, seed: int) -> CheckResult:
    orbit = {k: unipotent_orbit_dim(k) for k in range(2, 13)}
    ranks = {}
    for k in range(2, 7):
        M = sympower_unipotent(k)
        ranks[k] = integer_rank([[M[i][j] - (i == j) for j in range(k)] for i in range(k)])
    ok = all(orbit[k] == k * (k - 1) for k in orbit) and all(ranks[k] == k - 1 for k in ranks)
    return CheckResult("lie_oracles", ok, "exact", {"orbit_dims": orbit, "sympower_ranks": ranks})


# --- metrics -----------------------------------------------------------------

STANDARD_GRID = ms.RadialGrid.from_radii(1e-3, 0.5, 2001)
CURVATURE_PATCH = (0.05, 0.25, 0.05, 0.25)


def check_pde_accuracy(tol: Tolerances, seed: int) -> CheckResult:
    sol = ms.solve_selfduality(STANDARD_GRID, ms.CoefficientModel(), tol=tol.solver_residual)
    err = float(np.max(np.abs(sol.u - ms.u_exact(sol.s))))
    fine = ms.solve_selfduality(STANDARD_GRID.refined(), ms.CoefficientModel(), tol=tol.solver_residual)
    err_fine = float(np.max(np.abs(fine.u - ms.u_exact(fine.s))))
    factor = err / err_fine
    lo, hi = tol.order_factor
    ok = err < tol.pde_accuracy and sol.newton_iterations <= 30 and lo <= factor <= hi
    return CheckResult(
        "pde_accuracy_and_order",
        ok,
        f"numeric({tol.pde_accuracy:g})",
        {"max_error": err, "iterations": sol.newton_iterations, "refinement_factor": factor},
    )


def curvature_samples(sol: ms.RadialSolution, step: float, per_side: int = 5) -> list[dict]:
    metric = ms.build_h_a(sol, CURVATURE_PATCH)
    out = []
    for x, y in metric.sample_points(per_side, margin=0.01):
        K = [ms.gauss_curvature_fd(metric, x, y, step / 2**i) for i in range(3)]
        ratio = (K[0] - K[1]) / (K[1] - K[2])
        out.append({"x": x, "y": y, "K": K[0], "K_half": K[1], "K_quarter": K[2], "richardson_ratio": ratio})
    return out


def check_curvature(tol: Tolerances, seed: int) -> CheckResult:
    detail = {}
    ok = True
    for model in ("zero", "const:0.05", "pole:0.05"):
        sol = ms.solve_selfduality(STANDARD_GRID, ms.CoefficientModel.parse(model), tol=tol.solver_residual)
        samples = curvature_samples(sol, tol.curvature_step)
        worst = max(abs(p["K"] + 4) for p in samples)
        ratios = [p["richardson_ratio"] for p in samples]
        model_ok = worst < tol.curvature and all(3.0 <= r <= 5.0 for r in ratios)
        ok &= model_ok
        detail[model] = {"points": len(samples), "max_abs_K_plus_4": worst,
                         "richardson_ratio_range": [min(ratios), max(ratios)]}
    return CheckResult("curvature_minus_four", ok, f"numeric({tol.curvature:g})", detail)


def check_positivity_decay(tol: Tolerances, seed: int) -> CheckResult:
    detail = {}
    ok = True
    for model in ("const:0.05", "pole:0.05", "const:0.01", "pole:0.01"):
        sol = ms.solve_selfduality(STANDARD_GRID, ms.CoefficientModel.parse(model), tol=tol.solver_residual)
        worst = float(np.max(ms.higgs_norm_field(sol)))
        ok &= worst < 1
        detail[model] = {"max_norm": worst}
    grid = ms.RadialGrid.from_radii(1e-4, 0.5, 4001)
    sol = ms.solve_selfduality(grid, ms.CoefficientModel.parse("pole:0.05"), tol=tol.solver_residual)
    norm = ms.higgs_norm_field(sol)
    below = sol.r < math.exp(-2)
    decreasing = bool(np.all(np.diff(norm[below]) > 0))
    ok &= decreasing and norm[0] < 1e-2
    detail["pole_decay"] = {"innermost": float(norm[0]), "monotone_below_e^-2": decreasing,
                            "measured_exponents": ms.norm_log_exponent(sol)}
    return CheckResult("positivity_and_decay", ok, "numeric(0.01)", detail)


def check_volume_boundedness(tol: Tolerances, seed: int) -> CheckResult:
    zero = ms.CoefficientModel()
    sol0 = ms.solve_selfduality(STANDARD_GRID, zero, tol=tol.solver_residual)
    v = ms.volume(sol0, 1e-3, 0.5)
    exact = ms.poincare_volume(1e-3, 0.5)
    ext_grid = ms.RadialGrid.from_radii(1e-4, 0.5, 2001)
    v_ext = ms.volume(ms.solve_selfduality(ext_grid, zero, tol=tol.solver_residual), 1e-4, 0.5)
    change = (v_ext - v) / v_ext

    brackets = []
    for grid in (STANDARD_GRID, STANDARD_GRID.refined()):
        a = ms.solve_selfduality(grid, ms.CoefficientModel("const", 0.05), tol=tol.solver_residual)
        b = ms.solve_selfduality(grid, zero, tol=tol.solver_residual)
        brackets.append(ms.mutual_boundedness(a, b))
    (lo1, hi1), (lo2, hi2) = brackets
    stable = abs(lo2 - lo1) <= tol.boundedness_rel * lo1 and abs(hi2 - hi1) <= tol.boundedness_rel * hi1
    finite = all(math.isfinite(x) and x > 0 for br in brackets for x in br)
    ok = abs(v - exact) <= tol.volume_rel * exact and 0 <= change < 0.03 and stable and finite and lo1 <= 1 <= hi1
    return CheckResult(
        "finite_volume_and_boundedness",
        ok,
        f"numeric({tol.volume_rel:g})",
        {"volume": v, "volume_exact": exact, "relative_change_to_1e-4": change, "brackets": brackets},
    )


CheckFn = Callable[[Tolerances, int], CheckResult]

SUITES: dict[str, list[CheckFn]] = {
    "algebra": [
        check_parabolic_degrees,
        check_stability_boundary,
        check_invariant_negativity,
        check_residue_invariance,
        check_hitchin_section,
    ],
    "dims": [check_triple_agreement, check_lie_oracles],
    "metrics": [
        check_pde_accuracy,
        check_curvature,
        check_positivity_decay,
        check_volume_boundedness,
    ],
}
SUITES["all"] = SUITES["algebra"] + SUITES["dims"] + SUITES["metrics"]


def run_suite(name: str, tol: Tolerances | None = None, seed: int = 0) -> list[CheckResult]:
    tol = tol or Tolerances()
    results = []
    for fn in SUITES[name]:
        try:
            results.append(fn(tol, seed))
        except Exception as exc:  # a crashing check is a failing check
            results.append(CheckResult(fn.__name__.removeprefix("check_"), False, "error", {"error": repr(exc)}))
    return results
