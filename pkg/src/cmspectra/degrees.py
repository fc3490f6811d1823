"""Degree sequences: validation, moments, regime diagnostics, and fixtures.

A :class:`DegreeSequence` is the common input of every sampler and closed
form in this package. Moments are exact integers (arbitrary precision when
the int64 fast path could overflow), cached up to order 5 because the
second-order eigenvalue expansion needs ``m5``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import InfeasibleParamsError, NonPositiveDegreeError, OddSumError

log = logging.getLogger(__name__)

_CACHED_MOMENTS = 5


class DegreeSequence:
    """Validated sequence of positive integer degrees with cached moments.

    Immutable after construction; safe to share across workers. ``m0`` and
    ``m_inf`` are the min and max degree, ``moment(k)`` is the exact power
    sum of the degrees (``moment(0) == n``).
    """

    __slots__ = ("_degrees", "_moments", "_m0", "_m_inf")

    def __init__(self, raw: Iterable[int]):
        degrees = np.asarray(list(raw) if not isinstance(raw, np.ndarray) else raw,
                             dtype=np.int64)
        if degrees.ndim != 1 or degrees.size == 0:
            raise NonPositiveDegreeError("degree sequence must be a nonempty 1-d sequence")
        if degrees.min() < 1:
            raise NonPositiveDegreeError(
                f"degrees must be >= 1, found {int(degrees.min())}"
            )
        total = int(degrees.sum())
        if total % 2 != 0:
            raise OddSumError(f"degree sum {total} is odd, no multigraph realizes it")
        degrees.setflags(write=False)
        self._degrees = degrees
        self._m0 = int(degrees.min())
        self._m_inf = int(degrees.max())
        self._moments = {0: int(degrees.size), 1: total}
        for k in range(2, _CACHED_MOMENTS + 1):
            self._moments[k] = self._power_sum(k)

    def _power_sum(self, k: int) -> int:
        # int64 is exact as long as the largest term times n cannot overflow
        if self._m_inf ** k * self._degrees.size < 2 ** 62:
            return int(np.sum(self._degrees ** k))
        return sum(int(d) ** k for d in self._degrees)

    # -- basic views ---------------------------------------------------------

    @property
    def degrees(self) -> np.ndarray:
        """Read-only int64 view of the degrees, in input order."""
        return self._degrees

    @property
    def n(self) -> int:
        return self._degrees.size

    def __len__(self) -> int:
        return self._degrees.size

    def __eq__(self, other) -> bool:
        return (isinstance(other, DegreeSequence)
                and np.array_equal(self._degrees, other._degrees))

    def __hash__(self) -> int:
        return hash(self._degrees.tobytes())

    def __repr__(self) -> str:
        d = self._degrees
        head = ",".join(str(int(x)) for x in d[:8])
        tail = ",..." if d.size > 8 else ""
        return f"DegreeSequence([{head}{tail}], n={d.size})"

    # -- moments ---------------------------------------------------------------

    @property
    def m0(self) -> int:
        """Minimum degree."""
        return self._m0

    @property
    def m_inf(self) -> int:
        """Maximum degree."""
        return self._m_inf

    @property
    def m1(self) -> int:
        return self._moments[1]

    @property
    def m2(self) -> int:
        return self._moments[2]

    @property
    def m3(self) -> int:
        return self._moments[3]

    @property
    def m4(self) -> int:
        return self._moments[4]

    @property
    def m5(self) -> int:
        return self._moments[5]

    def moment(self, k: int) -> int:
        """Exact power sum of the degrees of order ``k`` (k=0 gives n)."""
        if k < 0:
            raise ValueError(f"moment order must be >= 0, got {k}")
        if k not in self._moments:
            self._moments[k] = self._power_sum(k)
        return self._moments[k]

    # -- serialization --------------------------------------------------------

    def to_lines(self) -> str:
        """One degree per line; round-trips exactly via :meth:`from_lines`."""
        return "\n".join(str(int(d)) for d in self._degrees) + "\n"

    @classmethod
    def from_lines(cls, text: str) -> "DegreeSequence":
        return cls([int(line) for line in text.split() if line.strip()])

    def to_json(self) -> str:
        return json.dumps([int(d) for d in self._degrees])

    @classmethod
    def from_json(cls, text: str) -> "DegreeSequence":
        return cls(json.loads(text))


def new_degree_sequence(raw: Iterable[int]) -> DegreeSequence:
    """Validate ``raw`` and return it with cached moments."""
    return DegreeSequence(raw)


def moments(seq: DegreeSequence, k: int) -> int:
    return seq.moment(k)


# -- regime diagnostics --------------------------------------------------------

@dataclass(frozen=True)
class AssumptionReport:
    """Diagnostics for the bounded-inhomogeneity and sparsity conditions.

    ``ratio_inhomogeneity`` is max/min degree; ``sparsity_index`` is
    max degree over sqrt(n). The sparsity flag warns once the max degree
    reaches sqrt(n); the inhomogeneity flag warns at ratio > 10 (heuristic
    threshold, the condition itself is asymptotic).
    """

    ratio_inhomogeneity: float
    sparsity_index: float
    flags: dict
    notes: tuple

    @property
    def ok(self) -> bool:
        return all(v == "pass" for v in self.flags.values())

    def to_dict(self) -> dict:
        return {
            "ratio_inhomogeneity": self.ratio_inhomogeneity,
            "sparsity_index": self.sparsity_index,
            "flags": dict(self.flags),
            "notes": list(self.notes),
        }


def assumption_diagnostics(seq: DegreeSequence) -> AssumptionReport:
    ratio = seq.m_inf / seq.m0
    sparsity = seq.m_inf / np.sqrt(seq.n)
    flags = {
        "bounded_inhomogeneity": "pass" if ratio <= 10.0 else "warn",
        "connectivity_sparsity": "warn" if sparsity >= 1.0 else "pass",
    }
    notes = []
    if 0.5 <= sparsity < 1.0:
        notes.append(f"max degree within a factor 2 of sqrt(n) (index {sparsity:.3f})")
    if seq.m_inf == 1:
        notes.append("all degrees are 1: perfect-matching graphs only")
    return AssumptionReport(float(ratio), float(sparsity), flags, tuple(notes))


# -- graphicality ----------------------------------------------------------------

def is_graphical(seq: DegreeSequence) -> bool:
    """Erdos-Gallai test: does a simple graph with these degrees exist?

    The even-sum requirement already holds for every DegreeSequence, so only
    the n inequalities are checked (vectorized, O(n log n)).
    """
    d = np.sort(seq.degrees)[::-1]
    n = d.size
    if d[0] > n - 1:
        return False
    csum = np.cumsum(d)
    ks = np.arange(1, n + 1)
    # number of entries >= k (d is descending)
    cnt_ge = np.searchsorted(-d, -ks, side="right")
    t = np.maximum(cnt_ge - ks, 0)          # tail entries that are capped at k
    big = np.maximum(cnt_ge, ks)            # tail entries smaller than k start here
    tail_small = csum[-1] - csum[big - 1]
    rhs = ks * (ks - 1) + ks * t + tail_small
    return bool(np.all(csum[ks - 1] <= rhs))


# -- fixture families -------------------------------------------------------------

_FAMILY_KINDS = ("regular", "band", "two_block")


def make_family(kind: str, n: int, params: Mapping, seed: int = 0) -> DegreeSequence:
    """Deterministic degree-sequence fixtures: regular, band, or two-block.

    regular:  ``{"d": k}`` - all degrees k.
    band:     ``{"lo": a, "hi": b}`` - iid uniform integers in [a, b].
    two_block: ``{"d1": a, "d2": b}`` - first half a, second half b.

    If the resulting sum is odd the last entry is incremented by 1 (recorded
    in the log); identical (kind, n, params, seed) is bit-identical across
    runs and platforms.
    """
    if n < 2:
        raise InfeasibleParamsError(f"need n >= 2, got {n}")
    if kind == "regular":
        d = int(params["d"])
        if d < 1 or d > n - 1:
            raise InfeasibleParamsError(f"regular degree must be in [1, n-1], got {d}")
        degrees = np.full(n, d, dtype=np.int64)
    elif kind == "band":
        lo, hi = int(params["lo"]), int(params["hi"])
        if not 1 <= lo <= hi:
            raise InfeasibleParamsError(f"band bounds need 1 <= lo <= hi, got [{lo}, {hi}]")
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        degrees = rng.integers(lo, hi + 1, size=n, dtype=np.int64)
    elif kind == "two_block":
        d1, d2 = int(params["d1"]), int(params["d2"])
        if min(d1, d2) < 1:
            raise InfeasibleParamsError("two_block degrees must be >= 1")
        degrees = np.empty(n, dtype=np.int64)
        degrees[: n // 2] = d1
        degrees[n // 2:] = d2
    else:
        raise InfeasibleParamsError(f"unknown family kind {kind!r}, expected {_FAMILY_KINDS}")
    if int(degrees.sum()) % 2 != 0:
        degrees[-1] += 1
        log.info("parity repair: incremented last entry of %s family to %d",
                 kind, int(degrees[-1]))
    return DegreeSequence(degrees)
