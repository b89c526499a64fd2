"""Hankel views, positive (semi)definiteness certification, Schur complements.

Entry (i, j) of the order-n view equals s_{i+j}; the structure is never stored
per cell.  Certification is scale-relative: a matrix with scale
max(1, largest |entry|) counts as PD when its smallest eigenvalue exceeds
pd_margin * scale, and as PSD when it exceeds -psd_tol * scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DEFAULT_TOL, PartialSequence, ToleranceOptions
from .errors import (
    LengthMismatch,
    MissingIndex,
    NonFiniteEntry,
    OrderTooLarge,
    SingularBlock,
)

ORDER_CAP = 64
ENUMERATION_CAP = 16


@dataclass(frozen=True)
class HankelView:
    """Order-n Hankel matrix over skew-diagonal values s_0..s_{2n}.

    ``values[k]`` is the value at index k, or None when unspecified.
    """

    order: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != 2 * self.order + 1:
            raise ValueError("need exactly 2n+1 skew-diagonal values")

    @property
    def size(self) -> int:
        return self.order + 1

    def entry(self, i: int, j: int):
        return self.values[i + j]

    @property
    def missing_indices(self) -> tuple[int, ...]:
        return tuple(k for k, v in enumerate(self.values) if v is None)

    @property
    def is_fully_specified(self) -> bool:
        return not self.missing_indices

    def matrix(self) -> np.ndarray:
        if not self.is_fully_specified:
            raise MissingIndex(f"view has missing indices {self.missing_indices}")
        vals = np.asarray(self.values, dtype=float)
        i = np.arange(self.size)
        return vals[i[:, None] + i[None, :]]

    def submatrix(self, rows: Sequence[int]) -> np.ndarray:
        rows = sorted(rows)
        out = np.empty((len(rows), len(rows)))
        for a, i in enumerate(rows):
            for b, j in enumerate(rows):
                v = self.values[i + j]
                if v is None:
                    raise MissingIndex(f"entry s_{i + j} unspecified")
                out[a, b] = v
        return out


@dataclass(frozen=True)
class PsdReport:
    """Outcome of a definiteness check.

    is_pd implies is_psd; is_pd holds exactly when min_eigenvalue exceeds
    pd_margin * scale.
    """

    is_pd: bool
    is_psd: bool
    min_eigenvalue: float
    failing_leading_order: int | None = None


def hankel(s: PartialSequence, n: int, cap: int = ORDER_CAP) -> HankelView:
    """View of H_n over the partial sequence; unspecified indices are None."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    if n > cap:
        raise OrderTooLarge(f"order {n} exceeds cap {cap}")
    vals = tuple(s.get(k) for k in range(2 * n + 1))
    return HankelView(n, vals)


def matrix_scale(H: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0


def min_eigenvalue(H: np.ndarray) -> float:
    if H.size == 0:
        return math.inf
    return float(np.linalg.eigvalsh(H)[0])


def check_definiteness(
    H: HankelView | np.ndarray, tol: ToleranceOptions = DEFAULT_TOL
) -> PsdReport:
    """Certify a fully specified view (or symmetric matrix) PD / PSD."""
    M = H.matrix() if isinstance(H, HankelView) else np.asarray(H, dtype=float)
    if not np.all(np.isfinite(M)):
        raise NonFiniteEntry("matrix has non-finite entries")
    scale = matrix_scale(M)
    mineig = min_eigenvalue(M)
    is_pd = mineig > tol.pd_margin * scale
    is_psd = mineig >= -tol.psd_tol * scale
    failing = None
    if not is_psd:
        for k in range(M.shape[0]):
            block = M[: k + 1, : k + 1]
            if min_eigenvalue(block) < -tol.psd_tol * matrix_scale(block):
                failing = k
                break
    return PsdReport(is_pd, is_psd, mineig, failing)


def schur_complement(H: HankelView | np.ndarray, alpha: int) -> np.ndarray:
    """C - B^T A^{-1} B for the 2x2 block partition at leading size alpha."""
    M = H.matrix() if isinstance(H, HankelView) else np.asarray(H, dtype=float)
    n = M.shape[0]
    if not 0 < alpha < n:
        raise ValueError("leading block size must split the matrix")
    A = M[:alpha, :alpha]
    B = M[:alpha, alpha:]
    C = M[alpha:, alpha:]
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularBlock(f"leading {alpha}x{alpha} block is numerically singular")
    return C - B.T @ np.linalg.solve(A, B)


def _admissible_rows(view: HankelView) -> list[int]:
    # row i can join a fully specified set only if its diagonal s_{2i} exists
    return [i for i in range(view.size) if view.values[2 * i] is not None]


def fully_specified_principal_index_sets(view: HankelView) -> list[tuple[int, ...]]:
    """Maximal row sets alpha with s_{i+j} specified for all i, j in alpha.

    Subsets of PD/PSD matrices stay PD/PSD, so only maximal sets are returned.
    Enumeration is Bron-Kerbosch over admissible rows and is capped.
    """
    if view.is_fully_specified:
        return [tuple(range(view.size))]
    if view.order > ENUMERATION_CAP:
        raise OrderTooLarge(
            f"principal-set enumeration capped at order {ENUMERATION_CAP}"
        )
    rows = _admissible_rows(view)
    spec = set(k for k, v in enumerate(view.values) if v is not None)
    adj = {i: set(j for j in rows if j != i and i + j in spec) for i in rows}

    cliques: list[tuple[int, ...]] = []

    def expand(clique: set, candidates: set, excluded: set):
        if not candidates and not excluded:
            cliques.append(tuple(sorted(clique)))
            return
        pivot = max(candidates | excluded, key=lambda u: len(adj[u] & candidates))
        for v in sorted(candidates - adj[pivot]):
            expand(clique | {v}, candidates & adj[v], excluded & adj[v])
            candidates = candidates - {v}
            excluded = excluded | {v}

    if rows:
        expand(set(), set(rows), set())
    return sorted(cliques)


def _partial_check(
    s: PartialSequence,
    tol: ToleranceOptions,
    order: int | None,
    strict: bool,
) -> bool:
    n = order if order is not None else math.ceil(s.horizon / 2)
    n = max(n, 0)
    view = hankel(s, n, cap=max(ORDER_CAP, n))
    for rows in fully_specified_principal_index_sets(view):
        if not rows:
            continue
        M = view.submatrix(rows)
        scale = matrix_scale(M)
        mineig = min_eigenvalue(M)
        if strict:
            if mineig <= tol.pd_margin * scale:
                return False
        else:
            if mineig < -tol.psd_tol * scale:
                return False
    return True


def is_partial_positive_definite(
    s: PartialSequence,
    tol: ToleranceOptions = DEFAULT_TOL,
    order: int | None = None,
) -> bool:
    """Every fully specified principal submatrix of H_n is PD.

    By convention n = ceil(horizon/2); maximal index sets cover all smaller
    orders, so a single enumeration suffices.
    """
    return _partial_check(s, tol, order, strict=True)


def is_partial_positive_semidefinite(
    s: PartialSequence,
    tol: ToleranceOptions = DEFAULT_TOL,
    order: int | None = None,
) -> bool:
    return _partial_check(s, tol, order, strict=False)


def pointwise_combine(
    s: Sequence[float],
    t: Sequence[float],
    op: str = "sum",
    alpha: float = 1.0,
    beta: float = 1.0,
) -> list[float]:
    """Combine positive sequences: weighted sum or termwise product."""
    if len(s) != len(t):
        raise LengthMismatch(f"lengths {len(s)} != {len(t)}")
    a = np.asarray(s, dtype=float)
    b = np.asarray(t, dtype=float)
    if op == "sum":
        if alpha < 0 or beta < 0:
            raise ValueError("weights must be nonnegative")
        out = alpha * a + beta * b
    elif op == "product":
        out = a * b
    else:
        raise ValueError(f"unknown op {op!r}")
    return out.tolist()


def hankel_matrix_from_values(values: Sequence[float]) -> np.ndarray:
    """Dense H_n for a fully specified prefix s_0..s_{2n} (odd length)."""
    vals = np.asarray(values, dtype=float)
    if len(vals) % 2 != 1:
        raise ValueError("need an odd number of values (s_0..s_{2n})")
    n = (len(vals) - 1) // 2
    i = np.arange(n + 1)
    return vals[i[:, None] + i[None, :]]


def per_order_min_eigenvalues(
    values: Sequence[float], max_order: int | None = None
) -> list[tuple[int, float]]:
    """(n, lambda_min(H_n)) for n = 0..max_order over a full prefix."""
    vals = np.asarray(values, dtype=float)
    top = (len(vals) - 1) // 2
    if max_order is not None:
        top = min(top, max_order)
    out = []
    for n in range(top + 1):
        H = hankel_matrix_from_values(vals[: 2 * n + 1])
        out.append((n, min_eigenvalue(H)))
    return out
