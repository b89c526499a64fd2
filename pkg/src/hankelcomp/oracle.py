"""Search-based decision of PD/PSD completion existence for small instances.

Independent of the constructive strategies: infeasibility is certified by
pairs of principal-minor sign conditions with disjoint feasibility intervals
(each minor involves a single unknown and is at most quadratic in it), and
feasibility by maximizing the minimum eigenvalue over the missing entries
with a seeded derivative-free coordinate search.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .core import DEFAULT_TOL, PartialSequence, Pattern, ToleranceOptions
from .errors import NotSingleMissing, TooManyMissing
from .hankel import fully_specified_principal_index_sets, hankel

SEARCH_CAP_MISSING = 6


@dataclass(frozen=True)
class MinorCondition:
    """Sign condition of one principal minor in one unknown."""

    rows: tuple[int, ...]
    variable: int
    lower: float
    upper: float
    description: str

    @property
    def interval(self) -> tuple[float, float]:
        return (self.lower, self.upper)

    def to_json_dict(self) -> dict:
        return {
            "rows": list(self.rows),
            "variable": self.variable,
            # open endpoints are encoded as nulls for JSON transport
            "interval": [
                self.lower if math.isfinite(self.lower) else None,
                self.upper if math.isfinite(self.upper) else None,
            ],
            "description": self.description,
        }


@dataclass(frozen=True)
class Obstruction:
    """Two minor conditions on one unknown with empty intersection."""

    variable: int
    first: MinorCondition
    second: MinorCondition

    def to_json_dict(self) -> dict:
        return {
            "variable": self.variable,
            "conditions": [self.first.to_json_dict(), self.second.to_json_dict()],
        }


@dataclass(frozen=True)
class SearchStats:
    evaluations: int
    method: str
    best_min_eigenvalue: float | None = None
    budget_exhausted: bool = False

    def to_json_dict(self) -> dict:
        return {
            "evaluations": self.evaluations,
            "method": self.method,
            "best_min_eigenvalue": self.best_min_eigenvalue,
            "budget_exhausted": self.budget_exhausted,
        }


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    certified: bool
    completion: dict[int, float] | None = None
    obstruction: Obstruction | None = None
    search_stats: SearchStats = SearchStats(0, "none")

    def to_json_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "certified": self.certified,
            "completion": None
            if self.completion is None
            else [{"index": k, "value": v} for k, v in sorted(self.completion.items())],
            "obstruction": None
            if self.obstruction is None
            else self.obstruction.to_json_dict(),
            "search_stats": self.search_stats.to_json_dict(),
        }


def _det_small(M: np.ndarray) -> float:
    n = M.shape[0]
    if n == 1:
        return float(M[0, 0])
    if n == 2:
        return float(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    if n == 3:
        return float(
            M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
            - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
            + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0])
        )
    return float(np.linalg.det(M))


def _minor_polynomial(values: dict[int, float], rows: Sequence[int], var: int):
    """Coefficients (a, b, c) of det as a function of the unknown entry.

    Returns None when the determinant is not (numerically) quadratic.
    """
    size = len(rows)
    scale = max([1.0] + [abs(v) for v in values.values()])

    def det_at(x: float) -> float:
        M = np.empty((size, size))
        for p, i in enumerate(rows):
            for q, j in enumerate(rows):
                M[p, q] = x if i + j == var else values[i + j]
        return _det_small(M)

    h = scale
    d0 = det_at(0.0)
    dp = det_at(h)
    dm = det_at(-h)
    a = (dp + dm - 2 * d0) / (2 * h * h)
    b = (dp - dm) / (2 * h)
    c = d0
    d2 = det_at(2 * h)
    pred = a * 4 * h * h + b * 2 * h + c
    mag = max(abs(d0), abs(dp), abs(dm), abs(d2), 1e-300)
    if abs(d2 - pred) > 1e-8 * mag:
        return None
    return a, b, c


def _condition_interval(a: float, b: float, c: float, scale: float):
    """Feasible x for a*x^2 + b*x + c > 0, when that set is an interval.

    Returns (lo, hi); emptiness is encoded by lo > hi, "everything" by
    (-inf, inf), and None marks an upward parabola whose feasible set is a
    union of two rays (not an interval, skipped by callers).
    """
    inf = math.inf
    typ = max(abs(a) * scale * scale, abs(b) * scale, abs(c), 1e-300)
    if abs(a) * scale * scale <= 1e-11 * typ:
        if abs(b) * scale <= 1e-11 * typ:
            return (-inf, inf) if c > 0 else (1.0, -1.0)
        root = -c / b
        return (root, inf) if b > 0 else (-inf, root)
    disc = b * b - 4 * a * c
    if abs(disc) <= 1e-12 * max(b * b, abs(4 * a * c), 1e-300):
        disc = 0.0
    if a < 0:
        if disc < 0:
            return (1.0, -1.0)
        sq = math.sqrt(disc)
        return ((-b + sq) / (2 * a), (-b - sq) / (2 * a))
    # upward parabola: feasible set is the outside of the roots
    if disc <= 0:
        return (-inf, inf)
    return None


def _scan_conditions(
    values: dict[int, float],
    missing: Sequence[int],
    n: int,
    tol: ToleranceOptions,
    max_minor: int = 4,
) -> dict[int, list[MinorCondition]]:
    """All interval conditions from principal minors with one unknown."""
    missing_set = set(missing)
    out: dict[int, list[MinorCondition]] = {m: [] for m in missing}
    scale = max([1.0] + [abs(v) for v in values.values()])
    rows_all = range(n + 1)
    for size in range(1, max_minor + 1):
        for rows in itertools.combinations(rows_all, size):
            entries = {i + j for i in rows for j in rows}
            unknown = entries & missing_set
            if len(unknown) != 1:
                continue
            var = unknown.pop()
            poly = _minor_polynomial(values, rows, var)
            if poly is None:
                continue
            interval = _condition_interval(*poly, scale)
            if interval is None or interval == (-math.inf, math.inf):
                continue
            lo, hi = interval
            out[var].append(
                MinorCondition(
                    rows=tuple(rows),
                    variable=var,
                    lower=lo,
                    upper=hi,
                    description=f"det H[{list(rows)}] > 0 needs s_{var} in ({lo!r}, {hi!r})",
                )
            )
    return out


def _intersect(conds: list[MinorCondition]):
    lo, hi = -math.inf, math.inf
    for c in conds:
        lo = max(lo, c.lower)
        hi = min(hi, c.upper)
    return lo, hi


def _find_empty_pair(conds: list[MinorCondition]):
    # Helly in one dimension: an empty intersection has an empty pair
    for c1, c2 in itertools.combinations(conds, 2):
        if max(c1.lower, c2.lower) >= min(c1.upper, c2.upper):
            return c1, c2
    worst_lo = max(conds, key=lambda c: c.lower)
    worst_hi = min(conds, key=lambda c: c.upper)
    return worst_lo, worst_hi


def interval_for_single_missing(
    s: PartialSequence,
    tol: ToleranceOptions = DEFAULT_TOL,
    order: int | None = None,
) -> tuple[float, float]:
    """Feasibility interval of the one missing entry within the horizon.

    Intersects the closed-form PD conditions of all leading principal minors
    of H_n; an empty result (lo >= hi) means no PD completion and is not an
    error.
    """
    n = order if order is not None else math.ceil(s.horizon / 2)
    missing = [k for k in range(2 * n + 1) if not s.is_specified(k)]
    if len(missing) != 1:
        raise NotSingleMissing(f"need exactly one missing index, have {missing}")
    var = missing[0]
    values = {k: s.value(k) for k in range(2 * n + 1) if s.is_specified(k)}
    scale = max([1.0] + [abs(v) for v in values.values()])
    lo, hi = -math.inf, math.inf
    for top in range(n + 1):
        rows = tuple(range(top + 1))
        entries = {i + j for i in rows for j in rows}
        if var not in entries:
            continue
        poly = _minor_polynomial(values, rows, var)
        if poly is None:
            raise NotSingleMissing(
                f"leading minor H[0..{top}] is not quadratic in s_{var}"
            )
        interval = _condition_interval(*poly, scale)
        if interval is None:
            raise NotSingleMissing(
                f"leading minor H[0..{top}] gives a non-interval condition"
            )
        lo = max(lo, interval[0])
        hi = min(hi, interval[1])
    return lo, hi


def _greedy_seed(
    values: dict[int, float], missing: Sequence[int], n: int, tol: ToleranceOptions
) -> dict[int, float]:
    """Schur-formula values for the missing entries, walked left to right."""
    vals = dict(values)
    for k in sorted(missing):
        if k == 0:
            vals[0] = 1.0
            continue
        if k % 2 == 0:
            m = k // 2 - 1
            i = np.arange(m + 1)
            H = np.array([[vals.get(a + b, 0.0) for b in i] for a in i])
            v = np.array([vals.get(j, 0.0) for j in range(m + 1, k)])
            try:
                q = float(v @ np.linalg.lstsq(H, v, rcond=None)[0])
            except np.linalg.LinAlgError:
                q = 0.0
            vals[k] = q + tol.growth * max(1.0, abs(q), abs(vals.get(0, 1.0)))
        else:
            m = (k - 1) // 2
            i = np.arange(max(m, 0))
            if len(i) == 0:
                vals[k] = 0.0
                continue
            H = np.array([[vals.get(a + b, 0.0) for b in i] for a in i])
            v = np.array([vals.get(j, 0.0) for j in range(m, k - m)])
            w = np.array([vals.get(j, 0.0) for j in range(m + 1, k - m + 1)])
            try:
                vals[k] = float(v @ np.linalg.lstsq(H, w, rcond=None)[0])
            except np.linalg.LinAlgError:
                vals[k] = 0.0
    return {k: vals[k] for k in missing}


def _min_eig_of(values: dict[int, float], x: dict[int, float], n: int) -> float:
    seq = np.empty(2 * n + 1)
    for k in range(2 * n + 1):
        seq[k] = x[k] if k in x else values[k]
    i = np.arange(n + 1)
    return float(np.linalg.eigvalsh(seq[i[:, None] + i[None, :]])[0])


def _fit_seed(
    values: dict[int, float],
    missing: Sequence[int],
    n: int,
    tol: ToleranceOptions,
    mode: str,
):
    """Candidate completion from a fitted measure plus a regularizer.

    Feasibility is still certified by the eigenvalue check on the result;
    the fit only supplies the candidate point.
    """
    from .schur import _chebyshev_reference_moments, _fit_background_measure

    s0 = values.get(0, 1.0)
    if s0 <= 0:
        return None
    envelope = 1.0
    for k, v in values.items():
        if k >= 1 and v != 0.0:
            envelope = max(envelope, abs(v / s0) ** (1.0 / k))
            if k >= 2:
                envelope = max(envelope, (4.0 * abs(v) / s0) ** (1.0 / k))
    ref = _chebyshev_reference_moments(1.05 * envelope, 2 * n)
    scale = max([1.0] + [abs(v) for v in values.values()])
    for frac in (0.25, 0.04, 3e-3, 0.0):
        theta = frac * s0
        fit_entries = {0: s0 - theta}
        ok = fit_entries[0] > 0
        for k, v in values.items():
            if 1 <= k <= 2 * n:
                fit_entries[k] = v - theta * ref[k]
                if k % 2 == 0 and fit_entries[k] <= 0:
                    ok = False
        if not ok:
            continue
        for extent in ("dense", "wide", "far"):
            bg = _fit_background_measure(
                fit_entries, envelope, prior_mass=theta / 2, extent=extent
            )
            if bg is None:
                continue
            nodes, weights = bg
            ks = np.arange(2 * n + 1)
            fitted = (
                (weights[None, :] * nodes[None, :] ** ks[:, None]).sum(axis=1)
                if nodes.size
                else np.zeros(2 * n + 1)
            )
            cand = fitted + theta * ref
            x = {k: float(cand[k]) for k in missing}
            mineig = _min_eig_of(values, x, n)
            good = (
                mineig > tol.pd_margin * scale
                if mode == "pd"
                else mineig >= -tol.psd_tol * scale
            )
            if good:
                return x, mineig
    return None


def decide_completable(
    s: PartialSequence,
    n: int,
    tol: ToleranceOptions = DEFAULT_TOL,
    mode: str = "pd",
    budget: int = 2000,
    seed: int = 0,
) -> FeasibilityResult:
    """Does a PD (resp. PSD) completion of H_n exist?

    Phase 1 intersects closed-form principal-minor conditions per unknown;
    a provably empty intersection certifies infeasibility.  Phase 2
    maximizes the minimum eigenvalue by multi-start cyclic coordinate search
    with bounded golden-section line searches, seeded at the Schur-formula
    values.
    """
    if mode not in ("pd", "psd"):
        raise ValueError("mode must be 'pd' or 'psd'")
    values = {k: s.value(k) for k in range(2 * n + 1) if s.is_specified(k)}
    missing = [k for k in range(2 * n + 1) if k not in values]
    scale = max([1.0] + [abs(v) for v in values.values()])
    evals = 0

    # cheap exits: a seed that already passes the eigenvalue check proves
    # feasibility outright
    if missing:
        seed0 = _greedy_seed(values, missing, n, tol)
        mineig0 = _min_eig_of(values, seed0, n)
        evals += 1
        ok0 = (
            mineig0 > tol.pd_margin * scale
            if mode == "pd"
            else mineig0 >= -tol.psd_tol * scale
        )
        if ok0:
            return FeasibilityResult(
                feasible=True,
                certified=True,
                completion={k: float(v) for k, v in seed0.items()},
                search_stats=SearchStats(evals, "schur-seed", mineig0),
            )
        fit = _fit_seed(values, missing, n, tol, mode)
        if fit is not None:
            seed_fit, mineig_fit = fit
            evals += 1
            return FeasibilityResult(
                feasible=True,
                certified=True,
                completion=seed_fit,
                search_stats=SearchStats(evals, "measure-fit-seed", mineig_fit),
            )

    # phase 1: obstruction scan with singleton substitution
    work = dict(values)
    work_missing = list(missing)
    for _ in range(len(missing) + 1):
        conds = _scan_conditions(work, work_missing, n, tol)
        substituted = False
        for var, clist in conds.items():
            if not clist:
                continue
            lo, hi = _intersect(clist)
            empty = lo >= hi if mode == "pd" else lo > hi + 1e-12 * scale
            if empty:
                first, second = _find_empty_pair(clist)
                return FeasibilityResult(
                    feasible=False,
                    certified=True,
                    obstruction=Obstruction(var, first, second),
                    search_stats=SearchStats(evals, "obstruction-scan"),
                )
            if mode == "psd" and math.isfinite(lo) and math.isfinite(hi):
                if hi - lo <= 1e-12 * scale:
                    work[var] = (lo + hi) / 2
                    work_missing.remove(var)
                    substituted = True
        if not substituted:
            break

    if not missing:
        mineig = _min_eig_of(values, {}, n)
        ok = (
            mineig > tol.pd_margin * scale
            if mode == "pd"
            else mineig >= -tol.psd_tol * scale
        )
        return FeasibilityResult(
            feasible=ok,
            certified=True,
            completion={} if ok else None,
            search_stats=SearchStats(1, "direct-check", mineig),
        )

    if len(missing) > SEARCH_CAP_MISSING:
        raise TooManyMissing(
            f"{len(missing)} missing entries exceed the search cap "
            f"{SEARCH_CAP_MISSING} and the obstruction scan was inconclusive"
        )

    # phase 2: maximize the minimum eigenvalue
    rng = np.random.default_rng(seed)
    conds = _scan_conditions(values, missing, n, tol)
    boxes = {}
    for var in missing:
        lo, hi = _intersect(conds[var]) if conds[var] else (-math.inf, math.inf)
        boxes[var] = (lo, hi)

    def clip_seed(x: dict[int, float]) -> dict[int, float]:
        out = {}
        for var in missing:
            lo, hi = boxes[var]
            v = x.get(var, 0.0)
            if math.isfinite(lo) and math.isfinite(hi):
                v = min(max(v, lo + 0.05 * (hi - lo)), hi - 0.05 * (hi - lo))
            elif math.isfinite(lo):
                v = max(v, lo + 0.5 * max(1.0, abs(lo)))
            elif math.isfinite(hi):
                v = min(v, hi - 0.5 * max(1.0, abs(hi)))
            out[var] = v
        return out

    seeds = [clip_seed(_greedy_seed(values, missing, n, tol))]
    seeds.append(clip_seed({m: 0.0 for m in missing}))
    while len(seeds) < 4:
        seeds.append(
            clip_seed(
                {m: float(rng.standard_normal()) * scale for m in missing}
            )
        )

    best_x = None
    best = -math.inf
    target = tol.pd_margin * scale * 4 if mode == "pd" else 0.0
    budget_exhausted = False
    for x0 in seeds:
        x = dict(x0)
        cur = _min_eig_of(values, x, n)
        evals += 1
        if cur > best:
            best, best_x = cur, dict(x)
        step = {m: max(1.0, abs(x[m])) for m in missing}
        for sweep in range(12):
            improved = False
            for var in missing:
                if evals >= budget:
                    budget_exhausted = True
                    break
                h = step[var]

                def neg(v: float) -> float:
                    return -_min_eig_of(values, {**x, var: v}, n)

                span = (x[var] - h, x[var] + h)
                res = minimize_scalar(
                    neg, bounds=span, method="bounded",
                    options={"maxiter": 20, "xatol": 1e-3 * h},
                )
                evals += res.nfev
                if -res.fun > cur + 1e-15 * scale:
                    cur = -res.fun
                    x[var] = float(res.x)
                    improved = True
                    if abs(x[var] - span[0]) < 0.05 * h or abs(x[var] - span[1]) < 0.05 * h:
                        step[var] = h * 4.0
                    else:
                        step[var] = max(h / 4.0, 1e-9 * scale)
            if cur > best:
                best, best_x = cur, dict(x)
            if best > target and mode == "pd":
                break
            if budget_exhausted or not improved:
                break
        if (best > target and mode == "pd") or (
            mode == "psd" and best >= 0.0
        ) or budget_exhausted:
            break

    stats = SearchStats(
        evals, "obstruction-scan+coordinate-golden", best, budget_exhausted
    )
    feasible = (
        best > tol.pd_margin * scale
        if mode == "pd"
        else best >= -tol.psd_tol * scale
    )
    if feasible:
        return FeasibilityResult(
            feasible=True,
            certified=True,
            completion={k: float(v) for k, v in best_x.items()},
            search_stats=stats,
        )
    clearly_negative = best < -tol.psd_tol * scale
    return FeasibilityResult(
        feasible=False,
        certified=False if mode == "pd" else clearly_negative,
        search_stats=stats,
    )


def decide_pd_completable(
    s: PartialSequence,
    n: int,
    tol: ToleranceOptions = DEFAULT_TOL,
    budget: int = 2000,
    seed: int = 0,
) -> FeasibilityResult:
    return decide_completable(s, n, tol, "pd", budget, seed)


def decide_psd_completable(
    s: PartialSequence,
    n: int,
    tol: ToleranceOptions = DEFAULT_TOL,
    budget: int = 2000,
    seed: int = 0,
) -> FeasibilityResult:
    return decide_completable(s, n, tol, "psd", budget, seed)


def _partial_ok(
    values: dict[int, float],
    cliques: list[tuple[int, ...]],
    strict: bool,
    tol: ToleranceOptions,
    floor: float | None = None,
) -> bool:
    pd_floor = tol.pd_margin if floor is None else floor
    for rows in cliques:
        size = len(rows)
        M = np.empty((size, size))
        for p, i in enumerate(rows):
            for q, j in enumerate(rows):
                M[p, q] = values[i + j]
        sc = max(1.0, float(np.max(np.abs(M))))
        mineig = float(np.linalg.eigvalsh(M)[0])
        if strict and mineig <= pd_floor * sc:
            return False
        if not strict and mineig < -tol.psd_tol * sc:
            return False
    return True


def _precompute_minors(idx: set[int], n: int, max_minor: int = 4):
    """Row sets whose principal minor has exactly one unknown entry."""
    structs = []
    for size in range(1, min(max_minor, n + 1) + 1):
        for rows in itertools.combinations(range(n + 1), size):
            entries = {i + j for i in rows for j in rows}
            unknown = entries - idx
            if len(unknown) == 1:
                structs.append((rows, unknown.pop()))
    return structs


def _scan_certify(
    values: dict[int, float],
    structs,
    mode: str,
    tol: ToleranceOptions,
    margin: float = 0.0,
) -> Obstruction | None:
    """Obstruction if the interval conditions are provably inconsistent.

    A positive margin demands the gap exceed numerical resolution, so the
    certificate survives the floating-point fit of the minor polynomials.
    """
    scale = max([1.0] + [abs(v) for v in values.values()])
    per_var: dict[int, list[MinorCondition]] = {}
    for rows, var in structs:
        poly = _minor_polynomial(values, rows, var)
        if poly is None:
            continue
        interval = _condition_interval(*poly, scale)
        if interval is None or interval == (-math.inf, math.inf):
            continue
        lo, hi = interval
        per_var.setdefault(var, []).append(
            MinorCondition(rows, var, lo, hi, f"det H[{list(rows)}] sign condition")
        )
    gap = margin * scale
    for var, clist in per_var.items():
        lo, hi = _intersect(clist)
        empty = lo >= hi + gap if mode == "pd" else lo > hi + max(gap, 1e-12 * scale)
        if empty:
            first, second = _find_empty_pair(clist)
            return Obstruction(var, first, second)
    return None


def find_witness(
    pattern: Pattern,
    n: int,
    tol: ToleranceOptions = DEFAULT_TOL,
    budget: int = 10000,
    seed: int = 0,
    mode: str = "pd",
) -> PartialSequence | None:
    """Search for a partial positive instance on the pattern with certifiably
    no PD (resp. PSD) completion of H_n.

    Samples atomic measures, restricts to the pattern, perturbs, keeps
    partial positive candidates, and returns the first one whose
    principal-minor conditions are provably inconsistent.  Only certified
    rejections count, so a returned witness is sound.
    """
    rng = np.random.default_rng(seed)
    idx = [k for k in pattern if k <= 2 * n]
    if not idx:
        return None
    view = hankel(PartialSequence({k: 1.0 for k in idx}, horizon=2 * n), n)
    cliques = [r for r in fully_specified_principal_index_sets(view) if r]
    structs = _precompute_minors(set(idx), n)
    ks = np.arange(max(idx) + 1)
    strict = mode == "pd"

    for trial in range(budget):
        na = int(rng.integers(1, 4))
        locs = rng.uniform(0.3, 2.5, size=na) * rng.choice([-1.0, 1.0], size=na)
        w = rng.uniform(0.4, 2.0, size=na)
        mom = (w[:, None] * locs[:, None] ** ks[None, :]).sum(axis=0)
        values = {k: float(mom[k]) for k in idx}
        if rng.random() < 0.85:
            for k in idx:
                values[k] *= 1.0 + rng.uniform(-0.3, 0.3)
        if not _partial_ok(values, cliques, strict, tol, floor=1e-5):
            continue
        if _scan_certify(values, structs, mode, tol, margin=1e-7) is not None:
            return PartialSequence(values, horizon=2 * n)
    return None
