"""Brute-force ground truth on tiny degree sequences.

Streams every perfect matching of the half-edges exactly once (recursive
pairing of the lowest unmatched index, canonical order), evaluates graph
functionals on the induced multigraphs, and reports exact unconditioned and
simple-conditioned expectations. Rational functionals are accumulated with
``fractions.Fraction`` so the comparisons against closed forms are exact,
not approximate.

Hard caps keep the worst case (15!! ~ 2e6 matchings) around a second; the
test fixtures all sit at m1 <= 12.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterator

import numpy as np
import scipy.stats

from .degrees import DegreeSequence
from .ensembles import (
    Matching,
    MultiGraph,
    SimpleGraph,
    as_generator,
    half_edge_vertices,
    is_simple,
)
from .errors import CmspectraError, DegenerateSupportError, TooLargeError

MAX_HALF_EDGES = 16
MAX_SIMPLE_N = 8
MAX_SIMPLE_DEGREE = 4


def double_factorial_odd(m: int) -> int:
    """(m)!! for odd m >= -1."""
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


# -- matching enumeration ------------------------------------------------------

def _pairings(avail: tuple) -> Iterator[tuple]:
    if not avail:
        yield ()
        return
    a = avail[0]
    for k in range(1, len(avail)):
        b = avail[k]
        rest = avail[1:k] + avail[k + 1:]
        for tail in _pairings(rest):
            yield ((a, b),) + tail


def enumerate_matchings(seq: DegreeSequence) -> Iterator[Matching]:
    """Every perfect matching of the half-edges, once, in canonical order."""
    if seq.m1 > MAX_HALF_EDGES:
        raise TooLargeError(
            f"matching enumeration capped at m1 = {MAX_HALF_EDGES}, got {seq.m1}"
        )
    for pairs in _pairings(tuple(range(seq.m1))):
        pairing = np.empty(seq.m1, dtype=np.int64)
        for a, b in pairs:
            pairing[a] = b
            pairing[b] = a
        yield Matching(pairing)


def _canonical_rows(seq: DegreeSequence) -> Iterator[list]:
    """Vertex pairs of every matching as a sorted list of (u, v), u <= v.

    Plain-Python canonicalization: the enumeration loop visits millions of
    tiny matchings, where per-call numpy overhead would dominate.
    """
    vertex_of = [int(x) for x in half_edge_vertices(seq)]
    for pairs in _pairings(tuple(range(seq.m1))):
        rows = [
            (vertex_of[a], vertex_of[b])
            if vertex_of[a] <= vertex_of[b]
            else (vertex_of[b], vertex_of[a])
            for a, b in pairs
        ]
        rows.sort()
        yield rows


def _rows_are_simple(rows: list) -> bool:
    prev = None
    for row in rows:
        if row[0] == row[1] or row == prev:
            return False
        prev = row
    return True


def _multigraphs(seq: DegreeSequence) -> Iterator[MultiGraph]:
    for rows in _canonical_rows(seq):
        yield MultiGraph(seq.n, rows, canonical=True)


# -- graph functionals ------------------------------------------------------------

@dataclass(frozen=True)
class GraphFunctional:
    """Named functional of a multigraph; exact ones return int or Fraction.

    ``finalize(total, count, seq)``, when given, turns the accumulated sum
    into the expectation; functionals whose per-graph value is an integer
    over a constant denominator use it to keep the enumeration loop in plain
    ints instead of Fraction arithmetic.
    """

    name: str
    fn: Callable[[MultiGraph, DegreeSequence], object]
    finalize: Callable[[object, int, DegreeSequence], object] | None = None


def adjacency_entry(i: int, j: int) -> GraphFunctional:
    def fn(g: MultiGraph, seq: DegreeSequence):
        return int(g.counts_matrix()[i, j])

    return GraphFunctional(f"a_{i}{j}", fn)


def _weighted_sum(g: MultiGraph, seq: DegreeSequence) -> int:
    """sum_ij d_i d_j a_ij as an exact integer (loops count 2 on the diagonal)."""
    d = seq.degrees
    rows = g.pair_rows
    return 2 * int(np.sum(d[rows[:, 0]] * d[rows[:, 1]]))


def rank1_quadratic_form() -> GraphFunctional:
    """<e, (A - e e^T) e> with e_i = d_i/sqrt(m1-1), as an exact Fraction."""

    def fin(total, count, seq):
        denom = seq.m1 - 1
        return Fraction(total, count * denom) - Fraction(seq.m2, denom) ** 2

    return GraphFunctional("h_quadratic_k1_rank1", _weighted_sum, fin)


def full_quadratic_form() -> GraphFunctional:
    """<e, (A - E[A]) e>: the rank-1 form plus the diagonal term m3/(m1-1)^2."""

    def fin(total, count, seq):
        denom = seq.m1 - 1
        return (Fraction(total, count * denom) - Fraction(seq.m2, denom) ** 2
                + Fraction(seq.m3, denom ** 2))

    return GraphFunctional("h_quadratic_k1_full", _weighted_sum, fin)


def wedge_sum() -> GraphFunctional:
    """sum over ordered pairs i != j of d_i d_j x (# common neighbours),
    where k is a neighbour of i when a_ki >= 1 (indicator semantics)."""

    def fn(g: MultiGraph, seq: DegreeSequence):
        b = (g.counts_matrix() > 0).astype(np.int64)
        common = b.T @ b
        d = seq.degrees
        return int(d @ common @ d) - int(np.sum(d * d * np.diag(common)))

    return GraphFunctional("wedge_sum", fn)


def full_quadratic_form_k2() -> GraphFunctional:
    """<e, (A - E[A])^2 e> as an exact Fraction.

    H e = [(m1-1) A d - m2 d + d*d] / (m1-1)^{3/2} entrywise, so the squared
    norm is an integer over (m1-1)^3 (no overflow within the m1 <= 16 cap).
    """

    def fn(g: MultiGraph, seq: DegreeSequence):
        d = seq.degrees
        w = (seq.m1 - 1) * (g.counts_matrix() @ d) - seq.m2 * d + d * d
        return int(w @ w)

    def fin(total, count, seq):
        return Fraction(total, count * (seq.m1 - 1) ** 3)

    return GraphFunctional("h_quadratic_k2_full", fn, fin)


def largest_eigenvalue() -> GraphFunctional:
    def fn(g: MultiGraph, seq: DegreeSequence):
        return float(np.linalg.eigvalsh(g.counts_matrix().astype(np.float64))[-1])

    return GraphFunctional("lambda1", fn)


def standard_functionals() -> list[GraphFunctional]:
    return [
        largest_eigenvalue(),
        rank1_quadratic_form(),
        full_quadratic_form(),
        full_quadratic_form_k2(),
        wedge_sum(),
    ]


# -- exact laws ---------------------------------------------------------------------

@dataclass(frozen=True)
class ExactLaw:
    """Exact expectations under the matching law and conditioned on simplicity."""

    total_matchings: int
    simple_count: int
    p_simple: Fraction
    expectations: dict
    conditional: dict
    no_simple_realization: bool

    def to_json_dict(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return {"num": v.numerator, "den": v.denominator, "float": float(v)}
            return v

        return {
            "total_matchings": self.total_matchings,
            "simple_count": self.simple_count,
            "p_simple": enc(self.p_simple),
            "expectations": {k: enc(v) for k, v in self.expectations.items()},
            "conditional": {k: enc(v) for k, v in self.conditional.items()},
            "no_simple_realization": self.no_simple_realization,
        }


def exact_cm_law(
    seq: DegreeSequence, functionals: list[GraphFunctional] | None = None
) -> ExactLaw:
    """Exact E[f] and E[f | simple] for every functional, plus P(simple)."""
    if seq.m1 > MAX_HALF_EDGES:
        raise TooLargeError(
            f"exact law enumeration capped at m1 = {MAX_HALF_EDGES}, got {seq.m1}"
        )
    if functionals is None:
        functionals = standard_functionals()
    total = 0
    simple = 0
    sums = {f.name: 0 for f in functionals}
    cond_sums = {f.name: 0 for f in functionals}
    for rows in _canonical_rows(seq):
        total += 1
        g_simple = _rows_are_simple(rows)
        if g_simple:
            simple += 1
        g = MultiGraph(seq.n, rows, canonical=True)
        for f in functionals:
            val = f.fn(g, seq)
            sums[f.name] += val
            if g_simple:
                cond_sums[f.name] += val
    assert total == double_factorial_odd(seq.m1 - 1)

    by_name = {f.name: f for f in functionals}

    def to_mean(name, v, count):
        if by_name[name].finalize is not None:
            return by_name[name].finalize(v, count, seq)
        if isinstance(v, int):
            return Fraction(v, count)
        return v / count

    expectations = {k: to_mean(k, v, total) for k, v in sums.items()}
    conditional = (
        {k: to_mean(k, v, simple) for k, v in cond_sums.items()}
        if simple > 0
        else {k: None for k in cond_sums}
    )
    return ExactLaw(
        total_matchings=total,
        simple_count=simple,
        p_simple=Fraction(simple, total),
        expectations=expectations,
        conditional=conditional,
        no_simple_realization=(simple == 0),
    )


def expected_adjacency_exact(seq: DegreeSequence) -> np.ndarray:
    """E[a_ij] under the matching law as an n x n array of Fractions."""
    if seq.m1 > MAX_HALF_EDGES:
        raise TooLargeError(
            f"exact expectation enumeration capped at m1 = {MAX_HALF_EDGES}, got {seq.m1}"
        )
    total = 0
    acc = np.zeros((seq.n, seq.n), dtype=np.int64)
    for g in _multigraphs(seq):
        total += 1
        acc += g.counts_matrix()
    out = np.empty((seq.n, seq.n), dtype=object)
    for i in range(seq.n):
        for j in range(seq.n):
            out[i, j] = Fraction(int(acc[i, j]), total)
    return out


def pairing_marginal_counts(seq: DegreeSequence) -> np.ndarray:
    """counts[a, b] = number of matchings pairing half-edges a and b.

    Uniformity of the matching law means every off-diagonal entry equals
    (m1-3)!!, i.e. a fraction 1/(m1-1) of all matchings.
    """
    if seq.m1 > MAX_HALF_EDGES:
        raise TooLargeError(
            f"marginal enumeration capped at m1 = {MAX_HALF_EDGES}, got {seq.m1}"
        )
    counts = np.zeros((seq.m1, seq.m1), dtype=np.int64)
    for pairs in _pairings(tuple(range(seq.m1))):
        for a, b in pairs:
            counts[a, b] += 1
            counts[b, a] += 1
    return counts


# -- simple-graph enumeration ----------------------------------------------------------

def enumerate_simple_graphs(seq: DegreeSequence) -> list[SimpleGraph]:
    """All labeled simple graphs with exactly these degrees (n <= 8, max degree 4)."""
    if seq.n > MAX_SIMPLE_N or seq.m_inf > MAX_SIMPLE_DEGREE:
        raise TooLargeError(
            f"simple enumeration capped at n = {MAX_SIMPLE_N}, "
            f"max degree {MAX_SIMPLE_DEGREE}"
        )
    n = seq.n
    residual = [int(d) for d in seq.degrees]
    adjacent = [set() for _ in range(n)]
    out: list[SimpleGraph] = []
    edges: list[tuple[int, int]] = []

    def recurse():
        v = -1
        for i in range(n):
            if residual[i] > 0:
                v = i
                break
        if v == -1:
            out.append(SimpleGraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2)))
            return
        # v is the lowest open vertex, so its remaining partners all lie above it
        candidates = [u for u in range(v + 1, n) if residual[u] > 0 and u not in adjacent[v]]
        need = residual[v]
        if len(candidates) < need:
            return
        for combo in combinations(candidates, need):
            residual[v] = 0
            for u in combo:
                residual[u] -= 1
                adjacent[v].add(u)
                adjacent[u].add(v)
                edges.append((v, u))
            recurse()
            for u in combo:
                residual[u] += 1
                adjacent[v].discard(u)
                adjacent[u].discard(v)
                edges.pop()
            residual[v] = need

    recurse()
    return out


# -- sampler uniformity ------------------------------------------------------------------

@dataclass(frozen=True)
class UniformityReport:
    statistic: float
    p_value: float
    samples: int
    support_size: int
    counts: tuple

    @property
    def ok(self) -> bool:
        return self.p_value > 0.01


def uniformity_check(sampler, seq: DegreeSequence, samples: int, rng) -> UniformityReport:
    """Chi-square test of sampled realization frequencies against uniform.

    ``sampler(seq, generator)`` must return a SimpleGraph whose degrees match
    the sequence; the support comes from exhaustive enumeration.
    """
    support = enumerate_simple_graphs(seq)
    if len(support) < 2:
        raise DegenerateSupportError(
            f"need >= 2 simple realizations for a uniformity test, found {len(support)}"
        )
    index = {g.canonical_key(): i for i, g in enumerate(support)}
    counts = np.zeros(len(support), dtype=np.int64)
    gen = as_generator(rng)
    for _ in range(samples):
        g = sampler(seq, gen)
        key = g.canonical_key()
        if key not in index:
            raise CmspectraError("sampler produced a graph outside the exact support")
        counts[index[key]] += 1
    stat, p = scipy.stats.chisquare(counts)
    return UniformityReport(
        statistic=float(stat),
        p_value=float(p),
        samples=samples,
        support_size=len(support),
        counts=tuple(int(c) for c in counts),
    )
