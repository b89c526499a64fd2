"""Strategy dispatch: route an instance to a completion construction.

The auto strategy consults the pattern classifier; completions always
re-validate through the definiteness checks before being returned.
"""

from __future__ import annotations

import math

from .core import DEFAULT_TOL, PartialSequence, Pattern, ToleranceOptions
from .errors import NotCompletable, NotPartialPD, UnsupportedPattern
from .hankel import (
    hankel_matrix_from_values,
    matrix_scale,
    min_eigenvalue,
    per_order_min_eigenvalues,
)
from .measure import (
    complete_arithmetic_pattern,
    complete_geometric,
    extract_measure,
    lift_psd_to_pd,
    moments,
    AtomicMeasure,
)
from .patterns import classify
from .schur import CompletionCertificate, complete_pattern_inductive

STRATEGIES = ("auto", "schur", "measure", "geometric", "lift")


def _root_map_measure(meas: AtomicMeasure, d: int) -> AtomicMeasure:
    import numpy as np

    locs = meas.locations
    phi = np.sign(locs) * np.abs(locs) ** (1.0 / d) if d % 2 else locs ** (1.0 / d)
    return AtomicMeasure.from_arrays(phi, meas.weights)


def complete_dilated(
    s: PartialSequence,
    target_horizon: int,
    d: int,
    tol: ToleranceOptions = DEFAULT_TOL,
) -> CompletionCertificate:
    """PSD completion of a pattern d*Q (odd d) via the subsequence.

    Completes the instance on Q with the inductive construction, extracts
    its quadrature measure and pulls it back through the d-th root.
    """
    if d % 2 == 0:
        raise UnsupportedPattern("dilated completion needs an odd step")
    sub_entries = {k // d: v for k, v in s.entries.items()}
    sub = PartialSequence(sub_entries, horizon=max(sub_entries, default=0))
    sub_horizon = max(2, math.ceil(target_horizon / d) + 2)
    inner = complete_pattern_inductive(sub, sub_horizon, tol)
    meas = extract_measure(inner.completed, tol)
    mapped = _root_map_measure(meas, d)
    vals = moments(mapped, target_horizon)
    for k, v in s.entries.items():
        if k <= target_horizon:
            expected = vals[k]
            if abs(expected - v) > 1e-8 * max(1.0, abs(v)):
                raise NotPartialPD(
                    f"dilated synthesis does not reproduce s_{k}"
                )
            vals[k] = v
    eigs = per_order_min_eigenvalues(vals, max_order=target_horizon // 2)
    return CompletionCertificate(
        completed=tuple(vals),
        strategy="measure",
        per_order_min_eig=tuple(eigs),
        representation=f"dilated-schur+gauss(d={d})",
    )


def complete_auto(
    s: PartialSequence,
    target_horizon: int,
    tol: ToleranceOptions = DEFAULT_TOL,
) -> CompletionCertificate:
    """Dispatch on the classifier's verdict; UnsupportedPattern otherwise."""
    verdict = classify(s.pattern, max(target_horizon, s.horizon), tol)
    if verdict.pd_status == "not_completable":
        raise NotCompletable(
            f"pattern {tuple(s.pattern)} is not positive definite completable "
            f"({verdict.rule})"
        )
    if verdict.pd_status != "completable":
        raise UnsupportedPattern(
            f"pattern {tuple(s.pattern)} has no known completion strategy "
            f"(verdict: {verdict.status})"
        )
    if verdict.strategy == "schur":
        return complete_pattern_inductive(s, target_horizon, tol)
    if verdict.strategy == "lift":
        rule = verdict.rule or ""
        if rule.startswith("dilated"):
            base, g = _gcd_of(s.pattern)

            def completer(seq, hor, tol=tol):
                return complete_dilated(seq, hor, g, tol)

            return lift_psd_to_pd(s, target_horizon, completer, tol)
        return lift_psd_to_pd(s, target_horizon, complete_arithmetic_pattern, tol)
    raise UnsupportedPattern(f"no dispatch for strategy {verdict.strategy!r}")


def _gcd_of(P: Pattern) -> tuple[Pattern, int]:
    idx = [k for k in P if k > 0]
    g = 0
    for k in idx:
        g = math.gcd(g, k)
    g = max(g, 1)
    return Pattern(tuple(k // g for k in P)), g


def complete_with_strategy(
    s: PartialSequence,
    target_horizon: int,
    strategy: str = "auto",
    d: int | None = None,
    l0: int | None = None,
    tol: ToleranceOptions = DEFAULT_TOL,
) -> CompletionCertificate:
    """Entry point used by the service and the CLI."""
    if strategy == "auto":
        cert = complete_auto(s, target_horizon, tol)
    elif strategy == "schur":
        cert = complete_pattern_inductive(s, target_horizon, tol)
    elif strategy == "measure":
        cert = complete_arithmetic_pattern(s, target_horizon, d, l0, tol)
    elif strategy == "geometric":
        cert = complete_geometric(s, target_horizon, tol)
    elif strategy == "lift":
        cert = lift_psd_to_pd(s, target_horizon, tol=tol)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    # no unchecked output: every emitted completion re-validates
    vals = list(cert.completed)
    for n, _ in cert.per_order_min_eig:
        H = hankel_matrix_from_values(vals[: 2 * n + 1])
        if min_eigenvalue(H) < -tol.psd_tol * matrix_scale(H):
            raise NotPartialPD(
                f"internal error: completion failed re-validation at order {n}"
            )
    return cert
