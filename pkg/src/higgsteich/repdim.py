"""Three independent counts of the real dimension of the Teichmüller component.

* ``hitchin_base_dim_real``: real dimension of the base of the Hitchin map
  restricted to companion fields, summed term by term with Riemann-Roch.
* ``teichmuller_component_dim``: the closed form.
* ``rep_variety_dim``: parameter count for representations of the punctured
  surface group with regular unipotent monodromy at each puncture.

All arithmetic is on Python integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

from .picard import SurfaceData, h0_nonspecial

__all__ = [
    "DimensionReport",
    "hitchin_base_terms",
    "hitchin_base_dim_real",
    "teichmuller_component_dim",
    "rep_variety_dim",
    "unipotent_orbit_dim",
    "sympower_unipotent",
    "regular_unipotent",
    "integer_rank",
    "dimension_report",
]


def _check_k(k: int, lo: int = 2, hi: int | None = None) -> None:
    if isinstance(k, bool) or not isinstance(k, int) or k < lo or (hi is not None and k > hi):
        rng = f"{lo} <= k" + (f" <= {hi}" if hi is not None else "")
        raise ValueError(f"need {rng}, got k={k!r}")


def integer_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by Bareiss fraction-free elimination."""
    A = [list(map(int, r)) for r in rows]
    if not A:
        return 0
    nrows, ncols = len(A), len(A[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        piv = next((r for r in range(rank, nrows) if A[r][col] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        p = A[rank][col]
        for r in range(rank + 1, nrows):
            a = A[r][col]
            row_r, row_p = A[r], A[rank]
            for c in range(col, ncols):
                # exact division is guaranteed by Sylvester's identity
                row_r[c] = (p * row_r[c] - a * row_p[c]) // prev
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


def hitchin_base_terms(g: int, n: int, k: int) -> list[tuple[int, int]]:
    """``(j, 2 h^0(K^j ⊗ ξ^{j-1}))`` for ``j = 2 .. k``."""
    _check_k(k)
    s = SurfaceData(g, n)
    s.require_hyperbolic()
    return [(j, 2 * h0_nonspecial(s.bundle(2 * j, j - 1))) for j in range(2, k + 1)]


def hitchin_base_dim_real(g: int, n: int, k: int) -> int:
    return sum(t for _, t in hitchin_base_terms(g, n, k))


def teichmuller_component_dim(g: int, n: int, k: int) -> int:
    _check_k(k)
    return 2 * (k * k - 1) * (g - 1) + k * (k - 1) * n


def regular_unipotent(k: int) -> list[list[int]]:
    """Identity plus ones on the superdiagonal."""
    return [[1 if c == r or c == r + 1 else 0 for c in range(k)] for r in range(k)]


def _traceless_basis(k: int) -> list[list[list[int]]]:
    basis = []
    for i in range(k):
        for j in range(k):
            if i != j:
                X = [[0] * k for _ in range(k)]
                X[i][j] = 1
                basis.append(X)
    for i in range(k - 1):
        X = [[0] * k for _ in range(k)]
        X[i][i], X[i + 1][i + 1] = 1, -1
        basis.append(X)
    return basis


def _matmul(A: list[list[int]], B: list[list[int]]) -> list[list[int]]:
    k = len(A)
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(k)] for i in range(k)]


@lru_cache(maxsize=None, typed=True)
def unipotent_orbit_dim(k: int) -> int:
    """Dimension of the conjugacy class of the regular unipotent in ``SL(k)``.

    Computed as the rank of ``X -> XU - UX`` on traceless matrices.
    """
    _check_k(k, 2, 12)
    U = regular_unipotent(k)
    columns = []
    for X in _traceless_basis(k):
        XU, UX = _matmul(X, U), _matmul(U, X)
        columns.append([XU[i][j] - UX[i][j] for i in range(k) for j in range(k)])
    # rank of the k^2 x (k^2-1) matrix whose columns are the images
    return integer_rank(columns)


def sympower_unipotent(k: int) -> list[list[int]]:
    """Matrix of ``S^{k-1}`` of ``[[1, 1], [0, 1]]`` on the monomials ``x^{k-1-j} y^j``.

    ``x -> x`` and ``y -> x + y``, so column ``j`` is the expansion of
    ``x^{k-1-j} (x + y)^j``: entry ``(i, j) = C(j, i)``.
    """
    _check_k(k)
    M = [[comb(j, i) for j in range(k)] for i in range(k)]
    N = [[M[i][j] - (i == j) for j in range(k)] for i in range(k)]
    if any(M[i][i] != 1 for i in range(k)) or any(M[i][j] for i in range(k) for j in range(i)):
        raise ArithmeticError("symmetric power is not unipotent upper triangular")
    if integer_rank(N) != k - 1:
        raise ArithmeticError("symmetric power is not regular unipotent")
    return M


def rep_variety_dim(g: int, n: int, k: int) -> int:
    """Parameter count for the representation space.

    ``2g`` generators free in ``SL(k)``, ``n`` puncture generators each in
    the regular unipotent class, minus ``k^2 - 1`` for the surface relation
    and ``k^2 - 1`` for overall conjugation.
    """
    _check_k(k)
    if n < 1:
        raise ValueError(
            "rep_variety_dim counts puncture generators and needs n >= 1; "
            "use teichmuller_component_dim for closed surfaces"
        )
    dim_sl = k * k - 1
    return 2 * g * dim_sl + n * unipotent_orbit_dim(k) - 2 * dim_sl


@dataclass(frozen=True)
class DimensionReport:
    g: int
    n: int
    k: int
    hitchin_base_real_dim: int
    closed_form_dim: int
    rep_variety_dim: int
    per_j_terms: tuple[tuple[int, int], ...] = field(default=())
    relation_and_conjugation_term: int = 0

    @property
    def agree(self) -> bool:
        return self.hitchin_base_real_dim == self.closed_form_dim == self.rep_variety_dim

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "n": self.n,
            "k": self.k,
            "hitchin_base_real_dim": self.hitchin_base_real_dim,
            "closed_form_dim": self.closed_form_dim,
            "rep_variety_dim": self.rep_variety_dim,
            "rep_variety_subtracted": self.relation_and_conjugation_term,
            "agree": self.agree,
            "per_j_terms": [list(t) for t in self.per_j_terms],
        }


def dimension_report(g: int, n: int, k: int) -> DimensionReport:
    terms = tuple(hitchin_base_terms(g, n, k))
    return DimensionReport(
        g=g,
        n=n,
        k=k,
        hitchin_base_real_dim=sum(t for _, t in terms),
        closed_form_dim=teichmuller_component_dim(g, n, k),
        rep_variety_dim=rep_variety_dim(g, n, k),
        per_j_terms=terms,
        relation_and_conjugation_term=2 * (k * k - 1),
    )
