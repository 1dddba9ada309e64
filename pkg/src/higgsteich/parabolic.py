"""Parabolic bundles with trivial flags and one weight shared by all punctures."""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .picard import (
    IncompatibleSurfaceError,
    LineBundleClass,
    SurfaceData,
    degree,
    dual,
)

__all__ = [
    "ParabolicBundle",
    "build_E",
    "build_W",
    "m_of_k",
    "par_degree",
    "par_dual",
    "sub_par_degree",
    "format_fraction",
]


def format_fraction(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass(frozen=True)
class ParabolicBundle:
    """Direct sum of line bundles with weight ``weight`` on the full fiber at each puncture."""

    summands: tuple[LineBundleClass, ...]
    weight: Fraction
    surface: SurfaceData

    def __post_init__(self) -> None:
        object.__setattr__(self, "summands", tuple(self.summands))
        object.__setattr__(self, "weight", Fraction(self.weight))
        if not self.summands:
            raise ValueError("a parabolic bundle needs at least one summand")
        for b in self.summands:
            if b.surface != self.surface:
                raise IncompatibleSurfaceError(f"summand {b} is on {b.surface}, not {self.surface}")
        if not 0 <= self.weight < 1:
            raise ValueError(f"weight must lie in [0, 1), got {self.weight}")
        if self.weight.denominator not in (1, 2):
            warnings.warn(
                f"weight {self.weight} has denominator {self.weight.denominator}; "
                "only 0 and 1/2 occur for E and W_k",
                stacklevel=2,
            )

    @property
    def rank(self) -> int:
        return len(self.summands)

    @property
    def degree(self) -> int:
        return sum(degree(b) for b in self.summands)

    @property
    def par_degree(self) -> Fraction:
        return par_degree(self)

    def exponent_multiset(self) -> Counter:
        return Counter(b.exponents for b in self.summands)

    def same_as(self, other: ParabolicBundle) -> bool:
        """Equality up to reordering of the summands."""
        return (
            self.surface == other.surface
            and self.weight == other.weight
            and self.exponent_multiset() == other.exponent_multiset()
        )

    def to_json(self) -> dict:
        return {
            "summands": [b.to_json() for b in self.summands],
            "weight": format_fraction(self.weight),
            "rank": self.rank,
            "par_degree": format_fraction(self.par_degree),
        }


def par_degree(pb: ParabolicBundle) -> Fraction:
    """``sum(deg) + n * weight * rank``, exactly."""
    return pb.degree + pb.surface.punctures * pb.weight * pb.rank


def sub_par_degree(pb: ParabolicBundle, indices: Iterable[int]) -> Fraction:
    """Parabolic degree of the sum of the selected summands with the induced structure.

    A trivial flag restricts to a trivial flag, so the sub-bundle keeps the
    weight of ``pb``.
    """
    idx = sorted(set(indices))
    if not idx:
        raise ValueError("empty index set")
    d = sum(degree(pb.summands[i]) for i in idx)
    return d + pb.surface.punctures * pb.weight * len(idx)


def build_E(surface: SurfaceData) -> ParabolicBundle:
    """``(L ⊗ ξ)^* ⊕ L`` with weight 1/2.

    The order is fixed: the Higgs field sends the second summand into the
    first.
    """
    s = surface
    return ParabolicBundle((s.bundle(-1, -1), s.L), Fraction(1, 2), s)


def m_of_k(k: int) -> int:
    """Power of ξ that brings the weight of ``S^{k-1}E`` into ``[0, 1)``."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    return k // 2 - 1 if k % 2 == 0 else (k - 1) // 2


def build_W(surface: SurfaceData, k: int) -> ParabolicBundle:
    """``S^{k-1}(E) ⊗ ξ^{m(k)}`` as a sum of line bundles, descending in the L-exponent.

    The i-th summand is spanned by monomials with i factors from ``(L ⊗ ξ)^*``
    and ``k-1-i`` from ``L``, giving ``L^{k-1-2i} ⊗ ξ^{m(k)-i}``.
    """
    if isinstance(k, bool) or not isinstance(k, int):
        raise TypeError("k must be an int")
    m = m_of_k(k)
    summands = tuple(surface.bundle(k - 1 - 2 * i, m - i) for i in range(k))
    weight = Fraction(1, 2) if k % 2 == 0 else Fraction(0)
    return ParabolicBundle(summands, weight, surface)


def par_dual(pb: ParabolicBundle) -> ParabolicBundle:
    """Parabolic dual.

    With weight 0 this is the ordinary dual.  With weight ``α > 0`` the dual
    carries weight ``-α``; twisting by ``ξ^*`` moves it to ``1 - α``.
    """
    s = pb.surface
    if pb.weight == 0:
        return ParabolicBundle(tuple(dual(b) for b in pb.summands), Fraction(0), s)
    xi_dual = s.bundle(0, -1)
    summands: Sequence[LineBundleClass] = [dual(b) * xi_dual for b in pb.summands]
    return ParabolicBundle(tuple(summands), 1 - pb.weight, s)
