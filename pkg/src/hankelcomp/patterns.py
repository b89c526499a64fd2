"""Completability classification from the pattern alone.

Negative verdicts come from a catalog of non-completable 3x3/4x4 window
patterns (detected on Hankel-structured principal submatrices, i.e. index
sets in arithmetic progression) and from truncated arithmetic progressions
on the semidefinite side; positive verdicts from the inductive families, the
arithmetic-progression construction and the dilation equivalence.  Every
negative verdict carries a witness instance validated against the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .core import DEFAULT_TOL, PartialSequence, Pattern, ToleranceOptions
from .errors import TooManyMissing
from .hankel import (
    is_partial_positive_definite,
    is_partial_positive_semidefinite,
)
from .oracle import decide_completable, find_witness
from .schur import pattern_family

SCAN_ORDER_CAP = 16

# window patterns with no PD completion: the three 3x3 ones and the known
# 4x4 one; all are closed under index reversal
FORBIDDEN_3X3 = ((0, 1, 4), (0, 1, 3, 4), (0, 3, 4))
FORBIDDEN_4X4 = ((0, 1, 2, 4, 5, 6),)

# single-atom witness templates for the 3x3 windows (location, mass)
_WINDOW_ATOM = {
    (0, 1, 4): (0.5, 1.0),
    (0, 1, 3, 4): (0.5, 1.0),
    (0, 3, 4): (2.0, 1.0 / 16.0),
}
# hand-validated witness for the 4x4 window
_WITNESS_4X4 = {0: 1.0, 1: 0.5, 2: 1.0 / 3.0, 4: 1.0 / 9.0 + 1e-3, 5: -0.05, 6: 0.04}

# intro fixture: pattern {0,1,2,4,5} has no PSD completion
_PSD_WINDOW_CATALOG = {
    (0, 1, 2, 4, 5): {0: 1.0, 1: 1.0, 2: 1.0, 4: 1.0, 5: -1.0},
    (0, 1, 2, 3): {0: 1.0, 1: 1.0, 2: 1.0, 3: 2.0},
}


@dataclass(frozen=True)
class PatternVerdict:
    """Completability of a pattern, with rule citations and witnesses.

    status is the headline (the PD side when determined, else the PSD side);
    pd/psd sides are recorded independently.  Negative sides carry a witness
    instance together with the order at which the oracle refutes it.
    """

    status: str
    rule: str
    strategy: str | None
    pd_status: str
    psd_status: str
    pd_rule: str | None
    psd_rule: str | None
    witness: PartialSequence | None
    witness_mode: str | None
    witness_order: int | None
    horizon: int
    reduction: tuple[tuple[int, ...], int, int]

    def to_json_dict(self) -> dict:
        base, d, l0 = self.reduction
        return {
            "status": self.status,
            "rule": self.rule,
            "strategy": self.strategy,
            "pd_status": self.pd_status,
            "psd_status": self.psd_status,
            "pd_rule": self.pd_rule,
            "psd_rule": self.psd_rule,
            "witness": None if self.witness is None else self.witness.to_json_dict(),
            "witness_mode": self.witness_mode,
            "witness_order": self.witness_order,
            "horizon": self.horizon,
            "reduction": {"base": list(base), "d": d, "l0": l0},
        }


def reduce_pattern(P: Pattern) -> tuple[Pattern, int, int]:
    """Maximal (d, even l0) with P = d*P' + l0; P' has no finer reduction."""
    idx = tuple(P)
    if not idx:
        return Pattern(), 1, 0
    lo = idx[0]
    if len(idx) == 1:
        if lo % 2 == 0:
            return Pattern((0,)), 1, lo
        return Pattern((1,)), lo, 0
    for d in range(max(idx), 0, -1):
        if any((k - lo) % d != 0 for k in idx):
            continue
        l0 = lo
        while l0 >= 0 and l0 % 2 != 0:
            l0 -= d
        if l0 < 0:
            continue
        return Pattern(tuple((k - l0) // d for k in idx)), d, l0
    return P, 1, 0


def contains_forbidden_submatrix_pattern(
    P: Pattern, horizon: int
) -> tuple[tuple[int, ...], str] | None:
    """First Hankel-structured principal window whose induced pattern is in
    the non-PD-completable catalog.

    Windows are index sets in arithmetic progression (start a, step e), so
    the induced submatrix is itself Hankel over t_j = s_{2a+je}.
    """
    n = min(math.ceil(horizon / 2), SCAN_ORDER_CAP)
    spec = set(k for k in P if k <= horizon)
    for e in range(1, n + 1):
        for a in range(0, n + 1):
            if a + 2 * e <= n:
                induced = tuple(j for j in range(5) if 2 * a + j * e in spec)
                if induced in FORBIDDEN_3X3:
                    return (a, a + e, a + 2 * e), f"3x3:{induced}"
            if a + 3 * e <= n:
                induced = tuple(j for j in range(7) if 2 * a + j * e in spec)
                if induced in FORBIDDEN_4X4:
                    return (a, a + e, a + 2 * e, a + 3 * e), f"4x4:{induced}"
    return None


def _scaled_psd_window(P: Pattern, horizon: int):
    """Window (Q, d, l0) with Q in the PSD-negative catalog and the
    refutation order within reach of the horizon, or None."""
    base, d, l0 = reduce_pattern(P)
    key = tuple(base)
    if key in _PSD_WINDOW_CATALOG:
        need = {
            (0, 1, 2, 4, 5): 6,  # obstruction sits in H_3 of the base
            (0, 1, 2, 3): 4,
        }[key]
        order = (l0 + d * need + 1) // 2 + 1
        if order <= SCAN_ORDER_CAP:
            return key, d, l0, order
    m = base.prefix_length()
    if tuple(base) == tuple(range(m + 1)) and m >= 1:
        order = l0 // 2 + d * m
        if order <= SCAN_ORDER_CAP:
            return "prefix", d, l0, order
    return None


def _validate_witness(
    values: dict[int, float],
    horizon: int,
    order: int,
    mode: str,
    tol: ToleranceOptions,
) -> PartialSequence | None:
    cand = PartialSequence(values, horizon=max(horizon, 2 * order))
    partial_ok = (
        is_partial_positive_definite(cand, tol)
        if mode == "pd"
        else is_partial_positive_semidefinite(cand, tol)
    )
    if not partial_ok:
        return None
    try:
        res = decide_completable(cand, order, tol, mode, budget=400)
    except TooManyMissing:
        return None
    if not res.feasible and res.certified:
        return cand
    return None


def _pd_witness_for_hit(
    P: Pattern, horizon: int, hit_rows: tuple[int, ...], tol: ToleranceOptions
) -> tuple[PartialSequence | None, int]:
    """Witness instance on the full pattern for a forbidden-window hit.

    Single-atom values reproduce the paper's 1, 1/2, 1/16 template inside
    the window; entries outside get a ladder of diagonal boosts until the
    instance is partial PD while the window obstruction persists.
    """
    a, e = hit_rows[0], hit_rows[1] - hit_rows[0]
    order = hit_rows[-1]
    window_len = 2 * (len(hit_rows) - 1)
    induced = tuple(
        j for j in range(window_len + 1) if 2 * a + j * e in set(P.restrict(horizon))
    )
    window_idx = {2 * a + j * e for j in range(window_len + 1)}
    spec = [k for k in P if k <= horizon]

    if induced in _WINDOW_ATOM:
        lam, mu = _WINDOW_ATOM[induced]
        big = lam ** (1.0 / e)
        mass = mu * lam ** (-2.0 * a / e)
        base_vals = {}
        for k in spec:
            j, rem = divmod(k - 2 * a, e)
            if rem == 0 and 0 <= j <= window_len:
                base_vals[k] = mu * lam**j  # exact template powers
            else:
                base_vals[k] = mass * big**k
    else:
        base_vals = {
            k: _WITNESS_4X4[(k - 2 * a) // e] if k in window_idx else None
            for k in spec
        }
        lamb = 0.5 ** (1.0 / e)
        for k in spec:
            if base_vals[k] is None:
                base_vals[k] = lamb**k

    for boost in (0.0, 0.05, 0.2, 0.5, 1.0):
        values = dict(base_vals)
        for k in spec:
            if k not in window_idx and k % 2 == 0:
                values[k] = base_vals[k] * (1.0 + boost) + boost * 0.1
        w = _validate_witness(values, horizon, order, "pd", tol)
        if w is not None:
            return w, order
    scan_order = min(math.ceil(horizon / 2), SCAN_ORDER_CAP)
    w = find_witness(P, scan_order, tol, budget=4000, seed=11, mode="pd")
    return w, scan_order


def _psd_witness(
    P: Pattern, horizon: int, window, tol: ToleranceOptions
) -> tuple[PartialSequence | None, int]:
    key, d, l0, order = window
    spec = [k for k in P if k <= horizon]
    if key == "prefix":
        m = (max(spec) - l0) // d
        values = {k: 0.0 for k in spec}
        values[l0 + d * m] = 1.0
        if tuple(spec) == (0, 1, 2, 3):
            values = dict(_PSD_WINDOW_CATALOG[(0, 1, 2, 3)])
        w = _validate_witness(values, horizon, order, "psd", tol)
        return w, order
    template = _PSD_WINDOW_CATALOG[key]
    values = {l0 + d * j: template[j] for j in template}
    if set(values) != set(spec):
        return None, order
    w = _validate_witness(values, horizon, order, "psd", tol)
    return w, order


def _gcd_reduction(P: Pattern) -> tuple[Pattern, int]:
    idx = [k for k in P if k > 0]
    if not idx:
        return P, 1
    g = idx[0]
    for k in idx[1:]:
        g = math.gcd(g, k)
    if g <= 1:
        return P, 1
    return Pattern(tuple(k // g for k in P)), g


@lru_cache(maxsize=16384)
def _classify_cached(indices: tuple[int, ...], horizon: int, tol_key) -> PatternVerdict:
    tol = ToleranceOptions(*tol_key)
    P = Pattern(indices).restrict(horizon)
    reduction = reduce_pattern(P)
    red_tuple = (tuple(reduction[0]), reduction[1], reduction[2])

    pd_status = psd_status = "unknown"
    pd_rule = psd_rule = None
    strategy = None
    witness = None
    witness_mode = None
    witness_order = None

    # negative catalogs first: a forbidden window is decisive
    hit = contains_forbidden_submatrix_pattern(P, horizon)
    if hit is not None:
        rows, label = hit
        w, order = _pd_witness_for_hit(P, horizon, rows, tol)
        if w is not None:
            pd_status = "not_completable"
            pd_rule = f"forbidden-window {label} at rows {rows}"
            witness, witness_mode, witness_order = w, "pd", order

    window = _scaled_psd_window(P, horizon)
    if window is not None:
        w, order = _psd_witness(P, horizon, window, tol)
        if w is not None:
            psd_status = "not_completable"
            key = window[0]
            psd_rule = (
                "truncated arithmetic progression"
                if key == "prefix"
                else f"psd-window {key}"
            )
            if witness is None:
                witness, witness_mode, witness_order = w, "psd", order

    base, d, l0 = reduction
    if psd_status == "unknown":
        if not P:
            psd_status, psd_rule = "completable", "empty pattern"
        elif tuple(base) == (0,):
            psd_status, psd_rule = "completable", f"single even index (d={d}, l0={l0})"
            if strategy is None:
                strategy = "measure"

    if pd_status == "unknown":
        family = pattern_family(P, horizon)
        if family is not None:
            pd_status, pd_rule, strategy = "completable", family, "schur"
        else:
            base_g, g = _gcd_reduction(P)
            fam_g = pattern_family(base_g, horizon) if g > 1 else None
            prefix_like = tuple(base_g) == tuple(range(len(base_g)))
            if g > 1 and prefix_like:
                pd_status = "completable"
                pd_rule = f"arithmetic progression d={g}"
                strategy = "lift"
            elif g > 1 and fam_g is not None and g % 2 == 1:
                pd_status = "completable"
                pd_rule = f"dilated {fam_g} (d={g})"
                strategy = "lift"
            elif psd_status == "completable":
                pd_status = "completable"
                pd_rule = "psd-completable lifts to pd"
                strategy = "lift"

    if pd_status == "completable" and psd_status == "unknown" and not P:
        psd_status, psd_rule = "completable", "empty pattern"

    if pd_status != "unknown":
        status = (
            "PD_COMPLETABLE" if pd_status == "completable" else "NOT_PD_COMPLETABLE"
        )
        rule = pd_rule
    elif psd_status != "unknown":
        status = (
            "PSD_COMPLETABLE" if psd_status == "completable" else "NOT_PSD_COMPLETABLE"
        )
        rule = psd_rule
    else:
        status, rule = "UNKNOWN", "no applicable rule"

    if pd_status != "completable":
        strategy = strategy if pd_status == "unknown" else None

    return PatternVerdict(
        status=status,
        rule=rule or "",
        strategy=strategy if pd_status == "completable" or psd_status == "completable" else None,
        pd_status=pd_status,
        psd_status=psd_status,
        pd_rule=pd_rule,
        psd_rule=psd_rule,
        witness=witness,
        witness_mode=witness_mode,
        witness_order=witness_order,
        horizon=horizon,
        reduction=red_tuple,
    )


def classify(
    P: Pattern, horizon: int | None = None, tol: ToleranceOptions = DEFAULT_TOL
) -> PatternVerdict:
    """Completability verdict for the pattern truncated at the horizon.

    Rule priority: negative window catalogs, then structural positives
    (inductive families, arithmetic progressions, dilations, the psd-to-pd
    lift).  UNKNOWN when nothing applies.
    """
    if horizon is None:
        horizon = max(P) if len(P) else 0
    key = (tol.psd_tol, tol.pd_margin, tol.growth)
    return _classify_cached(tuple(P), int(horizon), key)
