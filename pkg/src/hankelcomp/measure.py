"""Measure-side completions: atomic measure extraction and synthesis.

A positive (sub)sequence is represented by a finite atomic measure via the
three-term-recurrence (Jacobi) pencil built from its Hankel factorization.
Completions of arithmetic patterns d*{0..m}+l0 map the recovered atoms
through the d-th root and reweight; geometric data completes uniquely; a
partial-PD instance on a PSD-completable pattern lifts to a strictly PD
completion by splitting off a scaled Hilbert tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .core import DEFAULT_TOL, PartialSequence, Pattern, ToleranceOptions
from .errors import (
    BadOffset,
    EpsilonUnderflow,
    IllConditioned,
    NotGeometric,
    NotPositive,
    Overflow,
    StieltjesViolation,
    UnsupportedPattern,
)
from .hankel import (
    hankel_matrix_from_values,
    is_partial_positive_definite,
    matrix_scale,
    min_eigenvalue,
    per_order_min_eigenvalues,
)
from .schur import CompletionCertificate, complete_double_tail


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many atoms (location, positive weight), locations increasing."""

    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        locs = [a[0] for a in self.atoms]
        if any(w <= 0 for _, w in self.atoms):
            raise ValueError("weights must be positive")
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise ValueError("locations must be strictly increasing")

    @property
    def locations(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms])

    @property
    def mass(self) -> float:
        return float(sum(w for _, w in self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    @classmethod
    def from_arrays(cls, locations, weights) -> "AtomicMeasure":
        pairs = sorted(zip(map(float, locations), map(float, weights)))
        return cls(tuple(pairs))

    def to_json_dict(self) -> dict:
        return {
            "atoms": [{"location": x, "weight": w} for x, w in self.atoms]
        }


def moments(m: AtomicMeasure, k_max: int) -> list[float]:
    """s_k = sum_i w_i * x_i^k for k = 0..k_max."""
    if len(m) == 0:
        return [0.0] * (k_max + 1)
    locs, w = m.locations, m.weights
    big = float(np.max(np.abs(locs)))
    if big > 1 and k_max * math.log(big) > 700:
        raise Overflow(f"|location|^{k_max} exceeds the floating-point range")
    ks = np.arange(k_max + 1)
    return (w[None, :] * locs[None, :] ** ks[:, None]).sum(axis=1).tolist()


def _leading_rank(t: np.ndarray, m: int, tol: ToleranceOptions) -> int:
    """Largest r with H_{r-1} positive definite at the deflation threshold."""
    scale = max(1.0, float(np.max(np.abs(t))))
    L = np.zeros((0, 0))
    pivots = []
    for k in range(m + 1):
        row = t[k : 2 * k]
        y = solve_triangular(L, row, lower=True) if k else np.zeros(0)
        pivot = t[2 * k] - float(y @ y)
        if pivot <= 1e-10 * scale:
            break
        pivots.append(pivot)
        newL = np.zeros((k + 1, k + 1))
        newL[:k, :k] = L
        newL[k, :k] = y
        newL[k, k] = math.sqrt(pivot)
        L = newL
    if pivots and max(pivots) / min(pivots) > 1e12:
        raise IllConditioned("factorization pivot ratio exceeds 1e12; reduce m")
    return len(pivots)


def _pad_odd_moment(t: np.ndarray, tol: ToleranceOptions) -> float:
    """Canonical choice of the one odd moment the pencil needs but the data
    does not provide (odd-length, full-rank input).

    The symmetric Schur value zeroes the trailing off-diagonal but can drag
    quadrature nodes negative on Stieltjes-flavored data; when the shifted
    sequence admits a flat extension, reflecting the Schur value across it
    keeps the nodes on the data's side.
    """
    mid = complete_double_tail(t, tol)[0]
    r = (len(t) + 1) // 2
    if r < 2:
        return mid
    u = np.asarray(t[1:], dtype=float)  # shifted sequence u_j = t_{j+1}
    q = len(u) // 2
    Hu = hankel_matrix_from_values(u[: 2 * q - 1])
    scale = max(1.0, float(np.max(np.abs(u))))
    if min_eigenvalue(Hu) <= tol.pd_margin * scale:
        return mid
    v = u[q : 2 * q]
    flat = float(v @ np.linalg.solve(Hu, v))
    if flat > mid:
        return flat + 0.5 * (flat - mid)
    return mid


def extract_measure(
    t: Sequence[float], tol: ToleranceOptions = DEFAULT_TOL
) -> AtomicMeasure:
    """Atomic measure reproducing a positive sequence t_0..t_{2m(+1)}.

    Builds the Jacobi pencil from the Cholesky factor of the leading
    positive definite block (deflating to the numerical rank in the singular
    case) and diagonalizes it; weights are t_0 times the squared first
    eigenvector components.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or len(t) == 0:
        raise ValueError("need a one-dimensional sequence of moments")
    m = (len(t) - 1) // 2
    scale = max(1.0, float(np.max(np.abs(t))))
    H = hankel_matrix_from_values(t[: 2 * m + 1])
    if min_eigenvalue(H) < -tol.psd_tol * scale:
        raise NotPositive("Hankel matrix of the data is not PSD")
    r = _leading_rank(t, m, tol)
    if r == 0:
        if np.max(np.abs(t)) > tol.psd_tol * scale:
            raise NotPositive("zero leading moment with nonzero data")
        return AtomicMeasure()
    work = list(t[: 2 * r])
    if len(work) < 2 * r:
        work.append(_pad_odd_moment(t[: 2 * r - 1], tol))
    work = np.asarray(work)
    i = np.arange(r)
    Hr = work[i[:, None] + i[None, :]]
    H1 = work[i[:, None] + i[None, :] + 1]
    L = np.linalg.cholesky(Hr)
    J = solve_triangular(L, solve_triangular(L, H1.T, lower=True).T, lower=True)
    J = (J + J.T) / 2
    locs, vecs = np.linalg.eigh(J)
    weights = t[0] * vecs[0] ** 2
    keep = weights > 0
    return AtomicMeasure.from_arrays(locs[keep], weights[keep])


def _root_map(locs: np.ndarray, d: int) -> np.ndarray:
    if d % 2 == 1:
        return np.sign(locs) * np.abs(locs) ** (1.0 / d)
    return locs ** (1.0 / d)


def _infer_arithmetic(pattern: Pattern, d: int | None, l0: int | None):
    idx = tuple(pattern)
    if not idx:
        raise UnsupportedPattern("empty pattern")
    if d is None or l0 is None:
        l0 = idx[0]
        if len(idx) == 1:
            d = 1
        else:
            d = math.gcd(*[k - l0 for k in idx[1:]])
    if l0 % 2 != 0 or l0 < 0:
        raise BadOffset(f"offset l0 must be even and nonnegative, got {l0}")
    if d < 1:
        raise UnsupportedPattern("step d must be at least 1")
    count = (idx[-1] - l0) // d + 1 if idx else 0
    expected = tuple(l0 + d * k for k in range(count))
    if idx != expected:
        raise UnsupportedPattern(
            f"pattern {idx} is not the arithmetic progression {d}*{{0..m}}+{l0}"
        )
    return d, l0, count


def complete_arithmetic_pattern(
    s: PartialSequence,
    target_horizon: int,
    d: int | None = None,
    l0: int | None = None,
    tol: ToleranceOptions = DEFAULT_TOL,
) -> CompletionCertificate:
    """PSD completion of a pattern d*{0..m}+l0 via the root map.

    Extracts the atomic measure of the subsequence t_k = s_{dk+l0}, maps
    atoms through the d-th root, reweights by 1/phi(x)^l0 and synthesizes.
    The specified entries are reproduced exactly; with d even all atoms must
    be strictly positive (Stieltjes side).
    """
    d, l0, count = _infer_arithmetic(s.pattern, d, l0)
    t = np.array([s.value(l0 + d * k) for k in range(count)])
    if count == 1:
        # mass-only data: the canonical bounded completion is constant
        c = float(t[0])
        if c < -tol.psd_tol:
            raise NotPositive("a lone even entry must be nonnegative")
        meas = AtomicMeasure(((1.0, c),)) if c > 0 else AtomicMeasure()
    else:
        meas = extract_measure(t, tol)
    locs, weights = meas.locations, meas.weights

    loc_scale = max(1.0, float(np.max(np.abs(locs)))) if len(meas) else 1.0
    zero = np.abs(locs) < 1e-12 * loc_scale
    if d % 2 == 0 and np.any(locs < -1e-9 * loc_scale):
        raise StieltjesViolation(
            "even step requires strictly positive atoms; data is not a "
            "Stieltjes subsequence"
        )
    if l0 > 0 and np.any(zero):
        zmass = float(weights[zero].sum())
        if zmass > tol.psd_tol * max(1.0, abs(t[0])):
            raise NotPositive(
                "a zero-location atom carries weight, but with offset l0 > 0 "
                "its contribution to s_l0 cannot be reproduced"
            )
        locs, weights = locs[~zero], weights[~zero]
    if d % 2 == 0:
        locs = np.maximum(locs, 0.0)

    phi = _root_map(locs, d)
    eta = np.array(weights, dtype=float)
    if l0 > 0:
        eta = weights / phi**l0  # phi^l0 > 0 since l0 is even
    mapped = AtomicMeasure.from_arrays(phi, eta)
    completed = np.array(moments(mapped, max(target_horizon, s.horizon)))

    for k, v in s.entries.items():
        if abs(completed[k] - v) > 1e-8 * max(1.0, abs(v)):
            raise NotPositive(
                f"synthesis does not reproduce s_{k} "
                f"(got {completed[k]!r}, want {v!r}); the data is not a "
                "truncated moment subsequence"
            )
    if l0 == 0:
        bound = np.abs(t) + abs(t[0]) + 1e-9 * max(1.0, float(np.max(np.abs(t))))
        synth = np.abs(completed[[d * k for k in range(count)]])
        if np.any(synth > bound):
            raise NotPositive("synthesized values violate the growth bound")

    out = completed[: target_horizon + 1].tolist()
    for k, v in s.entries.items():
        if k <= target_horizon:
            out[k] = v
    eigs = per_order_min_eigenvalues(out, max_order=target_horizon // 2)
    return CompletionCertificate(
        completed=tuple(out),
        strategy="measure",
        per_order_min_eig=tuple(eigs),
        representation="gauss-truncated",
    )


def complete_geometric(
    s: PartialSequence,
    target_horizon: int,
    tol: ToleranceOptions = DEFAULT_TOL,
) -> CompletionCertificate:
    """Unique PSD completion s_k = a*r^k of consecutive geometric data."""
    idx = tuple(s.pattern)
    if not idx or idx[0] != 0 or idx != tuple(range(len(idx))) or len(idx) < 3:
        raise NotGeometric("need consecutive values s_0..s_L with L >= 2")
    vals = np.array([s.value(k) for k in idx])
    a = vals[0]
    if a <= 0:
        raise NotGeometric("leading value must be positive")
    r = vals[1] / a
    for k in range(len(vals) - 1):
        if abs(vals[k + 1] - r * vals[k]) > 1e-10 * max(abs(vals[k + 1]), abs(r * vals[k]), a):
            raise NotGeometric("values do not fit a geometric progression")
    if abs(r) > 1 and target_horizon * math.log(abs(r)) > 700:
        raise Overflow("geometric growth exceeds the floating-point range")
    out = [a * r**k for k in range(target_horizon + 1)]
    for k, v in s.entries.items():
        if k <= target_horizon:
            out[k] = v
    eigs = per_order_min_eigenvalues(out, max_order=target_horizon // 2)
    return CompletionCertificate(
        completed=tuple(out),
        strategy="geometric",
        per_order_min_eig=tuple(eigs),
        unique_psd=True,
    )


def lift_psd_to_pd(
    s: PartialSequence,
    target_horizon: int,
    psd_completer: Callable[..., CompletionCertificate] | None = None,
    tol: ToleranceOptions = DEFAULT_TOL,
) -> CompletionCertificate:
    """Strictly PD completion from a PSD-completable pattern.

    Splits s = (s - eps*B) + eps*B with B the Hilbert moments restricted to
    the pattern, PSD-completes the first part and adds back the full Hilbert
    tail; the result is PD with min eigenvalue at least eps times the Hilbert
    Hankel's smallest eigenvalue.
    """
    if psd_completer is None:
        psd_completer = complete_arithmetic_pattern
    pattern = s.pattern
    if not pattern:
        raise UnsupportedPattern("empty pattern: nothing to lift")

    full = all(s.is_specified(k) for k in range(s.horizon + 1))
    if full and s.horizon >= target_horizon:
        vals = [s.value(k) for k in range(target_horizon + 1)]
        eigs = per_order_min_eigenvalues(vals, max_order=target_horizon // 2)
        if all(
            e > tol.pd_margin * matrix_scale(hankel_matrix_from_values(vals[: 2 * n + 1]))
            for n, e in eigs
        ):
            return CompletionCertificate(
                completed=tuple(vals),
                strategy="lift",
                per_order_min_eig=tuple(eigs),
                epsilon=0.0,
            )

    def minus(eps: float) -> PartialSequence:
        return PartialSequence(
            {k: v - eps / (k + 1) for k, v in s.entries.items()}, s.horizon
        )

    def feasible(eps: float) -> bool:
        return is_partial_positive_definite(minus(eps), tol)

    scale = s.scale()
    eps_max = s.value(0) if s.is_specified(0) else s.value(min(pattern))
    eps_max = abs(eps_max) or 1.0
    lo, hi = 0.0, eps_max
    if feasible(hi):
        lo = hi
    else:
        for _ in range(40):
            mid = (lo + hi) / 2
            if feasible(mid):
                lo = mid
            else:
                hi = mid
    eps = lo
    cert = None
    while eps > 1e-14 * scale:
        try:
            cert = psd_completer(minus(eps), target_horizon, tol=tol)
            break
        except (NotPositive, StieltjesViolation):
            eps /= 4.0
    if cert is None or eps <= 1e-14 * scale:
        raise EpsilonUnderflow("no positive perturbation keeps the data partial PD")

    out = [c + eps / (k + 1) for k, c in enumerate(cert.completed)]
    for k, v in s.entries.items():
        if k <= target_horizon:
            out[k] = v
    eigs = per_order_min_eigenvalues(out, max_order=target_horizon // 2)
    return CompletionCertificate(
        completed=tuple(out),
        strategy="lift",
        per_order_min_eig=tuple(eigs),
        representation=cert.representation or cert.strategy,
        epsilon=eps,
    )
