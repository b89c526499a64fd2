"""Domain types: partial moment sequences, specification patterns, tolerances.

A partial sequence holds finitely many specified moment values s_k indexed by
nonnegative integers, together with a horizon (the largest index the instance
speaks about).  All types are immutable and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from .errors import BadOffset, MissingIndex, NonFiniteEntry


@dataclass(frozen=True)
class ToleranceOptions:
    """Numerical policy shared by all checks and completions.

    psd_tol     relative tolerance for calling a matrix positive semidefinite
    pd_margin   relative margin required to call a matrix strictly PD
    growth      relative slack used when choosing free even entries
    """

    psd_tol: float = 1e-9
    pd_margin: float = 1e-12
    growth: float = 0.5

    def __post_init__(self):
        if not (self.psd_tol > 0 and self.pd_margin > 0 and self.growth > 0):
            raise ValueError("tolerances must be positive")


DEFAULT_TOL = ToleranceOptions()


@dataclass(frozen=True, order=True)
class Pattern:
    """Sorted, duplicate-free set of specified indices."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(sorted(set(int(k) for k in self.indices)))
        if idx and idx[0] < 0:
            raise ValueError("pattern indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    def __contains__(self, k: int) -> bool:
        return k in set(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __bool__(self) -> bool:
        return bool(self.indices)

    def restrict(self, horizon: int) -> "Pattern":
        return Pattern(tuple(k for k in self.indices if k <= horizon))

    def is_odd_subset(self) -> bool:
        """True iff every index is odd (vacuously true when empty)."""
        return all(k % 2 == 1 for k in self.indices)

    def prefix_length(self) -> int:
        """Largest m with {0,...,m} contained in the pattern, or -1."""
        m = -1
        s = set(self.indices)
        while m + 1 in s:
            m += 1
        return m

    def max(self) -> int:
        if not self.indices:
            raise ValueError("empty pattern has no maximum")
        return self.indices[-1]


@dataclass(frozen=True)
class PartialSequence:
    """Finitely many specified values s_k plus a horizon.

    ``entries`` maps index -> value.  The horizon defaults to the largest
    specified index and must dominate every specified index.
    """

    entries: Mapping[int, float] = field(default_factory=dict)
    horizon: int | None = None

    def __post_init__(self):
        clean: dict[int, float] = {}
        for k, v in dict(self.entries).items():
            k = int(k)
            v = float(v)
            if k < 0:
                raise ValueError(f"negative index {k}")
            if not math.isfinite(v):
                raise NonFiniteEntry(f"value at index {k} is not finite")
            clean[k] = v
        hor = self.horizon
        if hor is None:
            hor = max(clean) if clean else 0
        hor = int(hor)
        if clean and hor < max(clean):
            raise ValueError("horizon below largest specified index")
        if hor < 0:
            raise ValueError("horizon must be nonnegative")
        object.__setattr__(self, "entries", dict(sorted(clean.items())))
        object.__setattr__(self, "horizon", hor)

    # entries is a plain dict; treat instances as immutable.

    @classmethod
    def from_values(cls, values: Sequence[float], horizon: int | None = None) -> "PartialSequence":
        """Fully specified sequence s_0..s_{len-1}."""
        return cls({k: float(v) for k, v in enumerate(values)}, horizon)

    @property
    def pattern(self) -> Pattern:
        return Pattern(tuple(self.entries))

    def is_specified(self, k: int) -> bool:
        return k in self.entries

    def value(self, k: int) -> float:
        try:
            return self.entries[k]
        except KeyError:
            raise MissingIndex(f"index {k} is not specified") from None

    def get(self, k: int, default=None):
        return self.entries.get(k, default)

    def with_entry(self, k: int, v: float) -> "PartialSequence":
        new = dict(self.entries)
        new[int(k)] = float(v)
        return PartialSequence(new, max(self.horizon, int(k)))

    def with_horizon(self, horizon: int) -> "PartialSequence":
        return PartialSequence(self.entries, horizon)

    def scale(self) -> float:
        """max(1, largest absolute specified value)."""
        vals = [abs(v) for v in self.entries.values()]
        return max(1.0, max(vals)) if vals else 1.0

    def to_json_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "entries": [{"index": k, "value": v} for k, v in self.entries.items()],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PartialSequence":
        if not isinstance(data, dict):
            raise ValueError("sequence JSON must be an object")
        unknown = set(data) - {"horizon", "entries"}
        if unknown:
            raise ValueError(f"unknown fields in sequence JSON: {sorted(unknown)}")
        entries = {}
        for item in data.get("entries", []):
            extra = set(item) - {"index", "value"}
            if extra:
                raise ValueError(f"unknown fields in entry: {sorted(extra)}")
            k = item["index"]
            if not isinstance(k, int) or isinstance(k, bool):
                raise ValueError("entry index must be an integer")
            if k in entries:
                raise ValueError(f"duplicate index {k}")
            entries[k] = float(item["value"])
        return cls(entries, data.get("horizon"))


SequenceLike = Union[PartialSequence, Sequence[float]]


def pattern_of(s: PartialSequence) -> Pattern:
    """The set of positions of the specified entries."""
    return s.pattern


def subsequence(s: SequenceLike, d: int, l0: int, count: int) -> list[float]:
    """Values at indices l0, d+l0, 2d+l0, ... (count of them).

    The offset l0 must be even; positivity of the input then carries over to
    the extracted subsequence.
    """
    if d < 1:
        raise ValueError("step d must be a positive integer")
    if count < 1:
        raise ValueError("count must be positive")
    if l0 < 0 or l0 % 2 != 0:
        raise BadOffset(f"offset l0 must be even and nonnegative, got {l0}")
    out = []
    for k in range(count):
        idx = k * d + l0
        if isinstance(s, PartialSequence):
            out.append(s.value(idx))
        else:
            if idx >= len(s):
                raise MissingIndex(f"index {idx} beyond sequence of length {len(s)}")
            out.append(float(s[idx]))
    return out


def primes_upto(n: int) -> tuple[int, ...]:
    """Primes <= n by trial sieve (n is small here)."""
    if n < 2:
        return ()
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = b"\x00" * len(sieve[p * p :: p])
    return tuple(i for i in range(n + 1) if sieve[i])
