"""Line bundles in the lattice spanned by a theta characteristic and the puncture bundle.

Every bundle used in this package is a tensor product ``L^p ⊗ ξ^q`` where
``L`` is a square root of the canonical bundle ``K`` of the compactified
surface and ``ξ = O(D)`` is the line bundle of the puncture divisor.  Only
the exponents and the surface topology are needed to compute degrees and
(non-special) section counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "SurfaceData",
    "LineBundleClass",
    "IncompatibleSurfaceError",
    "SpecialRangeError",
    "degree",
    "tensor",
    "dual",
    "power",
    "h0_nonspecial",
]


class IncompatibleSurfaceError(ValueError):
    """Raised when combining bundles that live on different surfaces."""


class SpecialRangeError(ValueError):
    """Raised when a section count is requested outside the non-special range."""


def _check_int(name: str, value: object) -> int:
    # bool is an int subclass; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} must be an int, got {type(value).__name__}")
    return value


@dataclass(frozen=True)
class SurfaceData:
    """Compact genus-``genus`` surface with ``punctures`` marked points removed."""

    genus: int
    punctures: int
    hyperbolic: bool = field(init=False)

    def __post_init__(self) -> None:
        _check_int("genus", self.genus)
        _check_int("punctures", self.punctures)
        if self.genus < 0 or self.punctures < 0:
            raise ValueError("genus and punctures must be non-negative")
        object.__setattr__(self, "hyperbolic", self.euler_char_neg > 0)

    @property
    def euler_char_neg(self) -> int:
        """``2g - 2 + n``, minus the Euler characteristic of the punctured surface."""
        return 2 * self.genus - 2 + self.punctures

    def require_hyperbolic(self) -> None:
        if not self.hyperbolic:
            raise ValueError(
                f"surface (g={self.genus}, n={self.punctures}) is not hyperbolic: "
                f"2g-2+n = {self.euler_char_neg} <= 0"
            )

    # named generators of the lattice
    @property
    def O(self) -> LineBundleClass:  # noqa: N802
        return LineBundleClass(0, 0, self)

    @property
    def L(self) -> LineBundleClass:  # noqa: N802
        return LineBundleClass(1, 0, self)

    @property
    def xi(self) -> LineBundleClass:
        return LineBundleClass(0, 1, self)

    @property
    def K(self) -> LineBundleClass:  # noqa: N802
        return LineBundleClass(2, 0, self)

    def bundle(self, l_exp: int, xi_exp: int) -> LineBundleClass:
        return LineBundleClass(l_exp, xi_exp, self)


@dataclass(frozen=True)
class LineBundleClass:
    """The class ``L^l_exp ⊗ ξ^xi_exp`` on ``surface``."""

    l_exp: int
    xi_exp: int
    surface: SurfaceData

    def __post_init__(self) -> None:
        _check_int("l_exp", self.l_exp)
        _check_int("xi_exp", self.xi_exp)

    @property
    def degree(self) -> int:
        return degree(self)

    @property
    def exponents(self) -> tuple[int, int]:
        return (self.l_exp, self.xi_exp)

    def __mul__(self, other: LineBundleClass) -> LineBundleClass:
        return tensor(self, other)

    def __pow__(self, m: int) -> LineBundleClass:
        return power(self, m)

    def __invert__(self) -> LineBundleClass:
        return dual(self)

    def __str__(self) -> str:
        parts = []
        if self.l_exp:
            parts.append("L" if self.l_exp == 1 else f"L^{self.l_exp}")
        if self.xi_exp:
            parts.append("xi" if self.xi_exp == 1 else f"xi^{self.xi_exp}")
        return " ⊗ ".join(parts) if parts else "O"

    def to_json(self) -> dict[str, int]:
        return {"l_exp": self.l_exp, "xi_exp": self.xi_exp, "degree": self.degree}


def degree(b: LineBundleClass) -> int:
    """Degree ``p(g-1) + qn`` of ``L^p ξ^q``."""
    s = b.surface
    return b.l_exp * (s.genus - 1) + b.xi_exp * s.punctures


def _same_surface(a: LineBundleClass, b: LineBundleClass) -> SurfaceData:
    if a.surface != b.surface:
        raise IncompatibleSurfaceError(
            f"bundles live on different surfaces: {a.surface} vs {b.surface}"
        )
    return a.surface


def tensor(a: LineBundleClass, b: LineBundleClass) -> LineBundleClass:
    s = _same_surface(a, b)
    return LineBundleClass(a.l_exp + b.l_exp, a.xi_exp + b.xi_exp, s)


def dual(b: LineBundleClass) -> LineBundleClass:
    return LineBundleClass(-b.l_exp, -b.xi_exp, b.surface)


def power(b: LineBundleClass, m: int) -> LineBundleClass:
    _check_int("m", m)
    return LineBundleClass(m * b.l_exp, m * b.xi_exp, b.surface)


def h0_nonspecial(b: LineBundleClass) -> int:
    """Complex dimension of ``H^0(b)`` when ``deg b > 2g - 2``.

    In that range ``h^1`` vanishes and Riemann-Roch gives ``deg - g + 1``.
    Anything at or below ``2g - 2`` depends on the choice of divisor and is
    refused.
    """
    g = b.surface.genus
    d = degree(b)
    if d <= 2 * g - 2:
        raise SpecialRangeError(
            f"special-range unsupported: deg({b}) = {d} <= 2g-2 = {2 * g - 2}"
        )
    return d - g + 1
