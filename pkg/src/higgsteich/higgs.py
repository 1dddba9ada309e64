"""Companion-shaped parabolic Higgs fields on ``W_k``.

Matrices in this module are written in the *companion basis*: position
``t = 0 .. k-1`` is the summand of ``W_k`` whose L-exponent is
``2t - (k-1)``.  In that basis the nilpotent field has ones on the
superdiagonal (entry ``(t-1, t)`` sends position ``t`` into position
``t-1``) and the coefficient ``a_j`` sits in the bottom row at column
``k - j``.  For ``E`` this is the summand order of :func:`build_E`; for
:func:`build_W` (descending L-exponent) position ``t`` is summand
``k-1-t``.  :func:`companion_positions` makes the translation and checks
that it is consistent with the bundle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from numbers import Number
from typing import Sequence

import numpy as np

from .parabolic import ParabolicBundle, sub_par_degree
from .picard import IncompatibleSurfaceError, LineBundleClass, SurfaceData

__all__ = [
    "ZERO",
    "SymbolicSection",
    "CompanionHiggsField",
    "Slot",
    "StabilityVerdict",
    "Witness",
    "HiggsTypeError",
    "ForeignBundleError",
    "canonical_xi_section",
    "constant_one",
    "coefficient_section",
    "companion_higgs",
    "companion_matrix",
    "residue_at",
    "companion_positions",
    "invariant_subbundles",
    "is_parabolic_stable",
    "scale_action",
    "scaling_limit",
    "char_poly",
    "char_poly_coefficients",
]


class HiggsTypeError(TypeError):
    """A coefficient does not live in the bundle its slot requires."""


class ForeignBundleError(ValueError):
    """The parabolic bundle does not carry the companion field's grading."""


class _Zero:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ZERO"

    def __reduce__(self):
        return (_Zero, ())


ZERO = _Zero()


@dataclass(frozen=True)
class SymbolicSection:
    """A holomorphic section known only through its bundle and its vanishing at ``D``.

    ``samples`` optionally holds values at caller-chosen points, multiplied by
    ``scale`` on read (see :meth:`values`).
    """

    bundle: LineBundleClass
    vanish_order_at_D: int = 0
    label: str = ""
    samples: tuple | None = None
    scale: Number = Fraction(1)

    def __post_init__(self) -> None:
        if self.vanish_order_at_D < 0:
            raise ValueError("vanishing order must be non-negative")
        if self.samples is not None:
            object.__setattr__(self, "samples", tuple(self.samples))

    def values(self) -> tuple | None:
        if self.samples is None:
            return None
        return tuple(self.scale * v for v in self.samples)

    def scaled(self, factor: Number) -> SymbolicSection:
        return replace(self, scale=self.scale * factor)

    def times_one_xi(self) -> SymbolicSection:
        """Image under ``s -> s ⊗ 1_ξ``: one more power of ξ, one more order of vanishing."""
        s = self.bundle.surface
        return replace(
            self,
            bundle=self.bundle * s.xi,
            vanish_order_at_D=self.vanish_order_at_D + 1,
            label=f"{self.label}⊗1_xi" if self.label else "1_xi",
        )


def constant_one(surface: SurfaceData) -> SymbolicSection:
    return SymbolicSection(surface.O, 0, "1")


def canonical_xi_section(surface: SurfaceData) -> SymbolicSection:
    return SymbolicSection(surface.xi, 1, "1_xi")


def coefficient_section(
    surface: SurfaceData,
    j: int,
    label: str | None = None,
    samples: Sequence | None = None,
    vanish_order_at_D: int = 0,
) -> SymbolicSection:
    """A section of ``K^j ⊗ ξ^{j-1}``, the home of the coefficient ``a_j``."""
    return SymbolicSection(
        surface.bundle(2 * j, j - 1),
        vanish_order_at_D,
        label if label is not None else f"a_{j}",
        None if samples is None else tuple(samples),
    )


@dataclass(frozen=True)
class Slot:
    """One nonzero matrix entry in the companion basis.

    ``bundle`` is the exponent pair ``(p, q)`` of the line bundle
    ``Hom(col, row) ⊗ K ⊗ ξ`` the entry is a section of.
    """

    row: int
    col: int
    bundle: tuple[int, int]
    vanish_order_at_D: int
    label: str


def _slot_exponents(row: int, col: int) -> tuple[int, int]:
    # Hom(position col, position row) ⊗ K ⊗ ξ; positions differ by L^2 ξ per step
    d = row - col
    return (2 * d + 2, d + 1)


@dataclass(frozen=True)
class CompanionHiggsField:
    k: int
    coefficients: tuple  # (a_2, ..., a_k), entries SymbolicSection or ZERO
    surface: SurfaceData | None = field(default=None, compare=False)

    def coefficient(self, j: int):
        return self.coefficients[j - 2]

    @property
    def is_nilpotent_model(self) -> bool:
        """True when every coefficient is identically zero."""
        return all(a is ZERO for a in self.coefficients)

    def slots(self) -> list[Slot]:
        out = [Slot(t - 1, t, (0, 0), 0, "1") for t in range(1, self.k)]
        for j in range(2, self.k + 1):
            a = self.coefficient(j)
            if a is ZERO:
                continue
            emb = a.times_one_xi()
            out.append(Slot(self.k - 1, self.k - j, emb.bundle.exponents, emb.vanish_order_at_D, emb.label))
        return out

    def numeric_matrix(self, sample: int = 0) -> np.ndarray:
        """Companion matrix with each coefficient replaced by its ``sample``-th value."""
        vals = []
        for j in range(2, self.k + 1):
            a = self.coefficient(j)
            if a is ZERO:
                vals.append(0)
                continue
            v = a.values()
            if v is None:
                raise ValueError(f"coefficient a_{j} has no numeric samples")
            vals.append(v[sample])
        return companion_matrix(vals)

    def to_json(self) -> dict:
        coeffs = []
        for j in range(2, self.k + 1):
            a = self.coefficient(j)
            if a is ZERO:
                coeffs.append({"j": j, "zero": True})
            else:
                entry = {"j": j, "zero": False, "label": a.label, "bundle": a.bundle.to_json(),
                         "vanish_order_at_D": a.vanish_order_at_D}
                vals = a.values()
                if vals is not None:
                    entry["samples"] = [[float(complex(v).real), float(complex(v).imag)] for v in vals]
                coeffs.append(entry)
        return {"k": self.k, "coefficients": coeffs}


def companion_matrix(values: Sequence) -> np.ndarray:
    """Numeric companion matrix for ``values = (a_2, ..., a_k)``."""
    k = len(values) + 1
    dtype = object if any(isinstance(v, Fraction) for v in values) else np.result_type(
        *[np.asarray(v).dtype for v in values], np.float64
    )
    M = np.zeros((k, k), dtype=dtype)
    if dtype is object:
        M[:] = 0
    for t in range(1, k):
        M[t - 1, t] = 1
    for j, a in enumerate(values, start=2):
        M[k - 1, k - j] = a
    return M


def companion_higgs(k: int, coeffs: Sequence, surface: SurfaceData | None = None) -> CompanionHiggsField:
    """Build ``θ(a_2, ..., a_k)``; every nonzero ``a_j`` must lie in ``K^j ⊗ ξ^{j-1}``."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 2:
        raise ValueError(f"k must be an int >= 2, got {k!r}")
    coeffs = tuple(coeffs)
    if len(coeffs) != k - 1:
        raise ValueError(f"expected {k - 1} coefficients a_2..a_{k}, got {len(coeffs)}")
    for j, a in enumerate(coeffs, start=2):
        if a is ZERO:
            continue
        if not isinstance(a, SymbolicSection):
            raise HiggsTypeError(f"a_{j} must be a SymbolicSection or ZERO, got {type(a).__name__}")
        if surface is None:
            surface = a.bundle.surface
        elif a.bundle.surface != surface:
            raise IncompatibleSurfaceError(f"a_{j} lives on {a.bundle.surface}, expected {surface}")
        want = (2 * j, j - 1)
        if a.bundle.exponents != want:
            raise HiggsTypeError(
                f"slot ({k - 1}, {k - j}): a_{j} must be a section of K^{j} ⊗ xi^{j - 1} "
                f"(exponents {want}), got {a.bundle} (exponents {a.bundle.exponents})"
            )
    h = CompanionHiggsField(k, coeffs, surface)
    for slot in h.slots():
        expected = _slot_exponents(slot.row, slot.col)
        if slot.bundle != expected:  # pragma: no cover - guarded by the checks above
            raise HiggsTypeError(f"slot ({slot.row}, {slot.col}) has bundle {slot.bundle}, expected {expected}")
        if slot.row == slot.col - 1 and slot.vanish_order_at_D != 0:  # pragma: no cover
            raise HiggsTypeError("superdiagonal entries must be the constant section 1")
        if slot.row == k - 1 and slot.vanish_order_at_D < 1:  # pragma: no cover
            raise HiggsTypeError(f"bottom-row slot ({slot.row}, {slot.col}) must vanish on D")
    return h


def residue_at(h: CompanionHiggsField) -> np.ndarray:
    """Value of the field at a puncture, read off from vanishing orders.

    A slot whose section vanishes on ``D`` contributes 0; the constant
    sections on the superdiagonal contribute 1.
    """
    R = np.zeros((h.k, h.k), dtype=np.int64)
    for slot in h.slots():
        if slot.vanish_order_at_D == 0:
            R[slot.row, slot.col] = 1
    return R


def companion_positions(h: CompanionHiggsField, pb: ParabolicBundle) -> list[int]:
    """``pos[t]`` is the index in ``pb.summands`` of companion position ``t``."""
    k = h.k
    if pb.rank != k:
        raise ForeignBundleError(f"bundle has rank {pb.rank}, field has size {k}")
    if h.surface is not None and h.surface != pb.surface:
        raise ForeignBundleError("field and bundle live on different surfaces")
    by_l = {}
    for idx, b in enumerate(pb.summands):
        if b.l_exp in by_l:
            raise ForeignBundleError(f"two summands with L-exponent {b.l_exp}")
        by_l[b.l_exp] = idx
    pos = []
    for t in range(k):
        want = 2 * t - (k - 1)
        if want not in by_l:
            raise ForeignBundleError(f"no summand with L-exponent {want}")
        pos.append(by_l[want])
    # Hom(position t, position t-1) ⊗ K ⊗ ξ must be trivial for the ones on the superdiagonal
    for t in range(1, k):
        src, dst = pb.summands[pos[t]], pb.summands[pos[t - 1]]
        hom = (dst.l_exp - src.l_exp + 2, dst.xi_exp - src.xi_exp + 1)
        if hom != (0, 0):
            raise ForeignBundleError(
                f"Hom({src}, {dst}) ⊗ K ⊗ xi is not trivial; bundle is not graded like W_{k}"
            )
    return pos


def _invariant_position_sets(h: CompanionHiggsField) -> list[frozenset[int]]:
    slots = h.slots()
    found = []
    for size in range(1, h.k):
        for S in combinations(range(h.k), size):
            S = frozenset(S)
            if all(slot.row in S for slot in slots if slot.col in S):
                found.append(S)
    return found


def invariant_subbundles(h: CompanionHiggsField, pb: ParabolicBundle) -> list[frozenset[int]]:
    """Proper sums of summands of ``pb`` mapped into themselves (twisted by ``K ⊗ ξ``) by ``h``.

    Index sets refer to ``pb.summands``.  Ordered by size, then by sorted
    contents.
    """
    pos = companion_positions(h, pb)
    sets = [frozenset(pos[t] for t in S) for S in _invariant_position_sets(h)]
    return sorted(sets, key=lambda S: (len(S), sorted(S)))


@dataclass(frozen=True)
class Witness:
    indices: frozenset[int]
    summands: tuple[LineBundleClass, ...]
    par_degree: Fraction
    bound: Fraction

    @property
    def destabilizing(self) -> bool:
        return self.par_degree >= self.bound

    def to_json(self) -> dict:
        return {
            "indices": sorted(self.indices),
            "summands": [str(b) for b in self.summands],
            "par_degree": str(self.par_degree),
            "bound": str(self.bound),
        }


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    method: str
    witnesses: tuple[Witness, ...]

    @property
    def label(self) -> str:
        return "stable" if self.stable else "unstable"

    def to_json(self) -> dict:
        return {
            "verdict": self.label,
            "method": self.method,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def scaling_limit(h: CompanionHiggsField) -> CompanionHiggsField:
    """Limit of ``scale_action(h, mu)`` as ``mu -> oo``: every coefficient goes to zero."""
    return CompanionHiggsField(h.k, (ZERO,) * (h.k - 1), h.surface)


def _nilpotent_check(pb: ParabolicBundle, h: CompanionHiggsField) -> tuple[bool, tuple[Witness, ...]]:
    total = pb.par_degree
    witnesses = []
    for S in invariant_subbundles(h, pb):
        bound = total * len(S) / pb.rank
        witnesses.append(
            Witness(S, tuple(pb.summands[i] for i in sorted(S)), sub_par_degree(pb, S), Fraction(bound))
        )
    return all(not w.destabilizing for w in witnesses), tuple(witnesses)


def is_parabolic_stable(pb: ParabolicBundle, h: CompanionHiggsField) -> StabilityVerdict:
    """Parabolic stability against invariant sums of summands.

    For the nilpotent field the check is direct.  Otherwise ``h`` is
    isomorphic to ``scale_action(h, mu)`` for every ``mu``, which tends to the
    nilpotent field; stability is open, so the nilpotent verdict is reported
    under the method ``stable-by-scaling-argument``.  Witnesses are always
    those of the nilpotent field.
    """
    if h.is_nilpotent_model:
        ok, wit = _nilpotent_check(pb, h)
        return StabilityVerdict(ok, "direct", wit)
    # guard the bundle grading for the actual field too
    invariant_subbundles(h, pb)
    ok, wit = _nilpotent_check(pb, scaling_limit(h))
    return StabilityVerdict(ok, "stable-by-scaling-argument" if ok else "nilpotent-limit-unstable", wit)


def _inverse_power(mu: Number, j: int) -> Number:
    if isinstance(mu, (int, Fraction)) and not isinstance(mu, bool):
        return Fraction(1) / Fraction(mu) ** j
    return mu ** (-j)


def scale_action(h: CompanionHiggsField, mu: Number) -> CompanionHiggsField:
    """``(1/mu) T^{-1} h T`` with ``T = diag(1, mu, ..., mu^{k-1})``.

    The superdiagonal is unchanged and ``a_j`` becomes ``a_j / mu^j``.
    """
    if mu == 0:
        raise ValueError("mu must be nonzero")
    coeffs = []
    for j in range(2, h.k + 1):
        a = h.coefficient(j)
        coeffs.append(a if a is ZERO else a.scaled(_inverse_power(mu, j)))
    return CompanionHiggsField(h.k, tuple(coeffs), h.surface)


def char_poly(M) -> list:
    """Coefficients ``[1, c_1, ..., c_k]`` of ``det(lambda I - M)``, highest degree first.

    Berkowitz's division-free recursion, so integer and Fraction matrices
    (object arrays) give exact results.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    n = M.shape[0]
    if n == 0:
        return [1]
    if M.dtype != object and not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    poly = [1, -M[n - 1, n - 1]]
    for i in range(n - 2, -1, -1):
        m = n - 1 - i
        R, C, A = M[i, i + 1:], M[i + 1:, i], M[i + 1:, i + 1:]
        col = [1, -M[i, i]]
        v = C
        for _ in range(m):
            col.append(-(R @ v))
            v = A @ v
        poly = [sum(col[r - c] * poly[c] for c in range(min(r, m) + 1)) for r in range(m + 2)]
    return poly


def char_poly_coefficients(M) -> list:
    """Hitchin-map values of ``M``: ``[a_2, ..., a_k]`` with ``det(lambda I - M) = lambda^k - tr(M) lambda^{k-1} - sum a_j lambda^{k-j}``.

    The sign is chosen so that a companion matrix returns its own bottom-row
    coefficients.
    """
    poly = char_poly(M)
    return [_plain(-c) for c in poly[2:]]


def _plain(x):
    return x.item() if isinstance(x, np.generic) else x
