"""Shared samplers and helpers for the test suite."""

import numpy as np
import pytest

from hankelcomp.core import PartialSequence
from hankelcomp.hankel import hankel_matrix_from_values, matrix_scale
from hankelcomp.schur import _chebyshev_reference_moments


def sample_atoms(rng, count, loc_lo=0.5, loc_hi=2.0, sep=0.25, positive=False):
    """Well-separated atom locations and O(1) weights."""
    locs = []
    while len(locs) < count:
        c = rng.uniform(loc_lo, loc_hi)
        if not positive:
            c *= rng.choice([-1.0, 1.0])
        if all(abs(c - x) > sep for x in locs):
            locs.append(float(c))
    weights = rng.uniform(0.5, 2.0, size=count)
    return np.array(locs), weights


def atom_moments(locs, weights, k_max):
    ks = np.arange(k_max + 1)
    return (weights[:, None] * locs[:, None] ** ks[None, :]).sum(axis=0)


def family_instance(rng, kind, horizon=21):
    """Partial PD instance on one of the inductive pattern families.

    Values come from a small atomic measure with mass below the s_0 seed
    plus a diffuse component at the data's scale, which keeps the instance
    interior to the moment cone.
    """
    natoms = int(rng.integers(2, 6))
    locs, weights = sample_atoms(rng, natoms)
    weights = weights / weights.sum() * rng.uniform(0.5, 0.8)
    mom = atom_moments(locs, weights, horizon)
    span = 1.05 * np.abs(locs).max()
    mom += 0.12 * weights.sum() * _chebyshev_reference_moments(span, horizon)
    if kind == "odd":
        pat = sorted(
            int(x)
            for x in rng.choice(
                np.arange(1, horizon + 1, 2), size=rng.integers(2, 7), replace=False
            )
        )
    elif kind == "odd-prefix":
        m = int(rng.integers(0, 5))
        odds = [
            int(k)
            for k in rng.choice(np.arange(m + 1, horizon + 1), size=5, replace=False)
            if k % 2 == 1
        ]
        pat = sorted(set(range(m + 1)) | set(odds))
    elif kind == "primes":
        pat = [p for p in (2, 3, 5, 7, 11, 13, 17, 19) if p <= horizon]
    else:  # prefix
        pat = list(range(int(rng.integers(1, 8))))
    entries = {int(k): float(mom[k]) for k in pat}
    if 0 in entries:
        entries[0] = 1.0
    return PartialSequence(entries, horizon=horizon)


def worst_margin_ratio(cert, pd_margin=1e-12):
    """min over certified orders of min_eig / (pd_margin * scale)."""
    vals = np.array(cert.completed)
    worst = np.inf
    for n, e in cert.per_order_min_eig:
        H = hankel_matrix_from_values(vals[: 2 * n + 1])
        worst = min(worst, e / (pd_margin * matrix_scale(H)))
    return worst


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
