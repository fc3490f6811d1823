"""Hard- and soft-constraint graph ensembles over a fixed degree sequence.

Hard constraints: uniform half-edge matchings (multigraphs), plus two exact
samplers of the *simple-conditioned* law - rejection (resample matchings
until simple) and switching MCMC (double-edge swaps from a greedy start).
Soft constraints: independent edges with probability d_i d_j / m1.

Half-edge (i, l) maps to flat index offset_i + l with offset_i = sum of the
degrees before i; all pairings are over these flat indices.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .degrees import DegreeSequence, is_graphical
from .errors import (
    AttemptsExhaustedError,
    InvalidRegimeError,
    NotGraphicalError,
)

log = logging.getLogger(__name__)

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:                      # pragma: no cover - numba is a hard dep
    _HAVE_NUMBA = False

# dense uint8 adjacency for the swap kernel up to this size (64 MB)
_DENSE_SWAP_LIMIT = 8192
_SWAP_BLOCK = 1 << 22


# -- seeded random streams ----------------------------------------------------

@dataclass(frozen=True)
class RngStream:
    """Deterministic, statistically independent random stream.

    Same (master_seed, stream_id) reproduces a bit-identical stream on every
    platform; distinct stream ids are independent. ``for_replicate`` packs a
    small lane code (experiment/ensemble) and a replicate index into one id.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)

    @classmethod
    def for_replicate(cls, master_seed: int, lane: int, replicate: int) -> "RngStream":
        return cls(master_seed, (lane << 32) | replicate)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator, or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(np.random.SeedSequence(int(rng)))
    raise TypeError(f"expected RngStream, Generator, or int seed, got {type(rng)!r}")


# -- graph value types ----------------------------------------------------------

def half_edge_offsets(seq: DegreeSequence) -> np.ndarray:
    """Flat index of the first half-edge of each vertex."""
    out = np.zeros(seq.n, dtype=np.int64)
    np.cumsum(seq.degrees[:-1], out=out[1:])
    return out


def half_edge_vertices(seq: DegreeSequence) -> np.ndarray:
    """Owning vertex of every flat half-edge index."""
    return np.repeat(np.arange(seq.n, dtype=np.int64), seq.degrees)


@dataclass(frozen=True)
class Matching:
    """Fixed-point-free involution over the flat half-edge indices."""

    pairing: np.ndarray

    def __post_init__(self):
        p = self.pairing
        if p.ndim != 1 or p.size % 2 != 0:
            raise ValueError("pairing must be a flat even-length involution")

    @property
    def num_half_edges(self) -> int:
        return self.pairing.size

    def is_valid(self) -> bool:
        p = self.pairing
        idx = np.arange(p.size)
        return bool(np.all(p[p] == idx) and np.all(p != idx))

    def pairs(self) -> np.ndarray:
        """(m1/2, 2) array of half-edge pairs with first < second."""
        idx = np.arange(self.pairing.size)
        keep = idx < self.pairing
        return np.stack([idx[keep], self.pairing[keep]], axis=1)


class MultiGraph:
    """Multigraph as an edge multiset; a self-loop adds 2 to its vertex degree."""

    __slots__ = ("n", "pair_rows", "_counts")

    def __init__(self, n: int, pair_rows, canonical: bool = False):
        rows = np.asarray(pair_rows, dtype=np.int64).reshape(-1, 2)
        if not canonical:
            lo = np.minimum(rows[:, 0], rows[:, 1])
            hi = np.maximum(rows[:, 0], rows[:, 1])
            rows = np.stack([lo, hi], axis=1)
            rows = rows[np.lexsort((rows[:, 1], rows[:, 0]))]
        self.n = int(n)
        self.pair_rows = rows
        self.pair_rows.setflags(write=False)
        self._counts = None

    def degrees(self) -> np.ndarray:
        return np.bincount(self.pair_rows.ravel(), minlength=self.n).astype(np.int64)

    def num_loops(self) -> int:
        return int(np.sum(self.pair_rows[:, 0] == self.pair_rows[:, 1]))

    def counts_matrix(self) -> np.ndarray:
        """Dense symmetric multiplicity matrix with a_ii = 2 x loops (small n)."""
        if self._counts is None:
            a = np.zeros((self.n, self.n), dtype=np.int64)
            for u, v in self.pair_rows.tolist():
                if u == v:
                    a[u, u] += 2
                else:
                    a[u, v] += 1
                    a[v, u] += 1
            a.setflags(write=False)
            self._counts = a
        return self._counts

    def adjacency(self) -> sp.csr_array:
        """Sparse float multiplicity matrix, diagonal 2 x loops."""
        u, v = self.pair_rows[:, 0], self.pair_rows[:, 1]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.ones(rows.size, dtype=np.float64)
        a = sp.coo_array((data, (rows, cols)), shape=(self.n, self.n))
        return a.tocsr()

    def to_simple(self) -> "SimpleGraph":
        if not is_simple(self):
            raise ValueError("multigraph has loops or repeated edges")
        return SimpleGraph(self.n, self.pair_rows)


class SimpleGraph:
    """Simple undirected graph: sorted edge list plus a cached CSR view."""

    __slots__ = ("n", "edges", "_csr")

    def __init__(self, n: int, edges: np.ndarray, validate: bool = True):
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            lo = np.minimum(e[:, 0], e[:, 1])
            hi = np.maximum(e[:, 0], e[:, 1])
            e = np.stack([lo, hi], axis=1)
            e = e[np.lexsort((e[:, 1], e[:, 0]))]
        if validate and e.size:
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("simple graph cannot contain loops")
            if np.any(np.all(e[1:] == e[:-1], axis=1)):
                raise ValueError("simple graph cannot contain repeated edges")
            if e[:, 1].max() >= n or e[:, 0].min() < 0:
                raise ValueError("edge endpoint out of range")
        self.n = int(n)
        self.edges = e
        self.edges.setflags(write=False)
        self._csr = None

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)

    def adjacency(self) -> sp.csr_array:
        if self._csr is None:
            u, v = self.edges[:, 0], self.edges[:, 1]
            rows = np.concatenate([u, v])
            cols = np.concatenate([v, u])
            data = np.ones(rows.size, dtype=np.float64)
            self._csr = sp.coo_array((data, (rows, cols)), shape=(self.n, self.n)).tocsr()
        return self._csr

    def canonical_key(self) -> bytes:
        """Hashable identity of the labeled graph (for exact-law counting)."""
        return self.edges.tobytes()

    def to_edgelist_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges)

    @classmethod
    def from_edgelist_text(cls, text: str, n: int | None = None) -> "SimpleGraph":
        rows = [tuple(map(int, line.split())) for line in text.splitlines() if line.strip()]
        edges = np.array(rows, dtype=np.int64).reshape(-1, 2)
        if n is None:
            if edges.size == 0:
                raise ValueError("cannot infer vertex count from an empty edge list")
            n = int(edges.max()) + 1
        return cls(n, edges)


# -- configuration-model matchings ------------------------------------------------

def sample_matching(seq: DegreeSequence, rng) -> Matching:
    """Uniform perfect matching of the half-edges ((m1-1)!! equally likely).

    A uniform shuffle of the flat half-edge indices paired off consecutively
    is an admissible pairing scheme: every half-edge pair has marginal
    probability 1/(m1-1).
    """
    gen = as_generator(rng)
    perm = gen.permutation(seq.m1)
    pairing = np.empty(seq.m1, dtype=np.int64)
    pairing[perm[0::2]] = perm[1::2]
    pairing[perm[1::2]] = perm[0::2]
    return Matching(pairing)


def matching_to_multigraph(m: Matching, seq: DegreeSequence) -> MultiGraph:
    if m.num_half_edges != seq.m1:
        raise ValueError(
            f"matching covers {m.num_half_edges} half-edges, sequence has {seq.m1}"
        )
    vertex_of = half_edge_vertices(seq)
    return MultiGraph(seq.n, vertex_of[m.pairs()])


def is_simple(g: MultiGraph) -> bool:
    rows = g.pair_rows
    if rows.size == 0:
        return True
    if np.any(rows[:, 0] == rows[:, 1]):
        return False
    return not np.any(np.all(rows[1:] == rows[:-1], axis=1))


def simplicity_probability_estimate(seq: DegreeSequence) -> float:
    """Heuristic P(matching is simple) ~ exp(-nu/2 - nu^2/4), nu = m2/m1 - 1."""
    nu = seq.m2 / seq.m1 - 1.0
    return math.exp(-nu / 2.0 - nu * nu / 4.0)


# -- rejection sampler -------------------------------------------------------------

def _pairs_are_simple(u: np.ndarray, v: np.ndarray) -> bool:
    if np.any(u == v):
        return False
    order = np.lexsort((v, u))
    us, vs = u[order], v[order]
    return not np.any((us[1:] == us[:-1]) & (vs[1:] == vs[:-1]))

def sample_cm_simple_rejection(
    seq: DegreeSequence, rng, max_attempts: int = 100_000
) -> tuple[SimpleGraph, int]:
    """Exactly uniform simple graph via resampling matchings until simple.

    Returns (graph, attempts_used). Raises AttemptsExhaustedError when the
    budget runs out, which happens with certainty for non-graphical input
    and quickly once P(simple) is small - switch to the MCMC sampler then.
    """
    gen = as_generator(rng)
    vertex_of = half_edge_vertices(seq)
    for attempt in range(1, max_attempts + 1):
        perm = gen.permutation(seq.m1)
        u = vertex_of[perm[0::2]]
        v = vertex_of[perm[1::2]]
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        if _pairs_are_simple(lo, hi):
            return SimpleGraph(seq.n, np.stack([lo, hi], axis=1), validate=False), attempt
    raise AttemptsExhaustedError(max_attempts)


# -- greedy realization + switching MCMC --------------------------------------------

def havel_hakimi(seq: DegreeSequence) -> SimpleGraph:
    """Largest-first greedy realization; raises NotGraphicalError if none exists."""
    import heapq

    heap = [(-int(d), i) for i, d in enumerate(seq.degrees)]
    heapq.heapify(heap)
    edges = []
    while heap:
        neg, v = heapq.heappop(heap)
        r = -neg
        # satisfy v completely against the r largest remaining residuals;
        # entries reach the heap only while their residual is positive
        grabbed = []
        while len(grabbed) < r:
            if not heap:
                raise NotGraphicalError(f"sequence {seq!r} is not graphical")
            grabbed.append(heapq.heappop(heap))
        for nd, u in grabbed:
            edges.append((v, u) if v < u else (u, v))
            if nd + 1 < 0:
                heapq.heappush(heap, (nd + 1, u))
    return SimpleGraph(seq.n, np.array(edges, dtype=np.int64), validate=False)


def default_swap_budget(num_edges: int) -> int:
    """Standard practitioners' heuristic: 20 |E| ln |E| proposed swaps."""
    return int(math.ceil(20.0 * num_edges * math.log(max(num_edges, 2))))


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _swap_kernel_dense(adj, edges, e1s, e2s, orient):  # pragma: no cover - jit
        accepted = 0
        for t in range(e1s.shape[0]):
            e1 = e1s[t]
            e2 = e2s[t]
            if e1 == e2:
                continue
            u = edges[e1, 0]
            v = edges[e1, 1]
            x = edges[e2, 0]
            y = edges[e2, 1]
            if orient[t] == 1:
                x, y = y, x
            if u == x or u == y or v == x or v == y:
                continue
            if adj[u, x] or adj[v, y]:
                continue
            adj[u, v] = 0
            adj[v, u] = 0
            adj[x, y] = 0
            adj[y, x] = 0
            adj[u, x] = 1
            adj[x, u] = 1
            adj[v, y] = 1
            adj[y, v] = 1
            edges[e1, 0] = u
            edges[e1, 1] = x
            edges[e2, 0] = v
            edges[e2, 1] = y
            accepted += 1
        return accepted


def _swap_block_python(edge_set, edges, e1s, e2s, orient):
    """Pure-python mirror of the dense kernel for very large n."""
    accepted = 0
    for t in range(e1s.shape[0]):
        e1, e2 = e1s[t], e2s[t]
        if e1 == e2:
            continue
        u, v = edges[e1]
        x, y = edges[e2]
        if orient[t] == 1:
            x, y = y, x
        if u == x or u == y or v == x or v == y:
            continue
        k1 = (u, x) if u < x else (x, u)
        k2 = (v, y) if v < y else (y, v)
        if k1 in edge_set or k2 in edge_set:
            continue
        edge_set.discard((u, v) if u < v else (v, u))
        edge_set.discard((x, y) if x < y else (y, x))
        edge_set.add(k1)
        edge_set.add(k2)
        edges[e1] = (u, x)
        edges[e2] = (v, y)
        accepted += 1
    return accepted


def sample_cm_simple_mcmc(seq: DegreeSequence, rng, swaps: int | None = None,
                          check_invariants: bool = False) -> SimpleGraph:
    """Uniform simple graph via double-edge swaps from a greedy realization.

    Proposal: two distinct edges chosen uniformly plus a uniform orientation,
    rewiring {u,v},{x,y} -> {u,x},{v,y}; any proposal creating a loop or a
    repeated edge is rejected (lazy chain), so the stationary law is uniform
    over simple realizations. Default budget is 20 |E| ln |E| proposals.

    ``check_invariants`` revalidates degrees and simplicity after every
    proposal (debug mode, orders of magnitude slower).
    """
    start = havel_hakimi(seq)
    m = start.num_edges
    if swaps is None:
        swaps = default_swap_budget(m)
    if swaps < 0:
        raise ValueError(f"swap budget must be >= 0, got {swaps}")
    if m < 2 or swaps == 0:
        return start

    gen = as_generator(rng)
    edges = np.array(start.edges, dtype=np.int64)
    use_dense = _HAVE_NUMBA and seq.n <= _DENSE_SWAP_LIMIT and not check_invariants
    if use_dense:
        adj = np.zeros((seq.n, seq.n), dtype=np.uint8)
        adj[edges[:, 0], edges[:, 1]] = 1
        adj[edges[:, 1], edges[:, 0]] = 1
    else:
        edge_set = {(int(u), int(v)) for u, v in edges}
        edges_list = [(int(u), int(v)) for u, v in edges]

    block_cap = 1 if check_invariants else _SWAP_BLOCK
    done = 0
    while done < swaps:
        block = min(block_cap, swaps - done)
        e1s = gen.integers(0, m, size=block)
        e2s = gen.integers(0, m, size=block)
        orient = gen.integers(0, 2, size=block)
        if use_dense:
            _swap_kernel_dense(adj, edges, e1s, e2s, orient)
        else:
            _swap_block_python(edge_set, edges_list, e1s, e2s, orient)
        done += block
        if check_invariants:
            state = SimpleGraph(seq.n, np.array(edges_list, dtype=np.int64))
            if not np.array_equal(state.degrees(), seq.degrees):
                raise AssertionError(f"degree invariant broken after {done} proposals")

    if not use_dense:
        edges = np.array(edges_list, dtype=np.int64)
    return SimpleGraph(seq.n, edges, validate=False)


# -- strategy dispatch ----------------------------------------------------------------

_REJECTION_THRESHOLD = 1e-4


@dataclass(frozen=True)
class SimpleSample:
    graph: SimpleGraph
    method: str                 # "rejection" | "mcmc"
    attempts_or_swaps: int


def sample_cm_simple(
    seq: DegreeSequence,
    rng,
    strategy: str = "auto",
    max_attempts: int = 100_000,
    swaps: int | None = None,
) -> SimpleSample:
    """Uniform simple graph with automatic sampler selection.

    "auto" uses rejection while the heuristic simplicity probability exceeds
    1e-4 and switching MCMC below that. Non-graphical input fails fast.
    """
    if not is_graphical(seq):
        raise NotGraphicalError(f"sequence {seq!r} is not graphical")
    auto = strategy == "auto"
    if auto:
        strategy = (
            "rejection"
            if simplicity_probability_estimate(seq) > _REJECTION_THRESHOLD
            else "mcmc"
        )
    if strategy == "rejection":
        gen = as_generator(rng)
        try:
            graph, attempts = sample_cm_simple_rejection(seq, gen, max_attempts)
            return SimpleSample(graph, "rejection", attempts)
        except AttemptsExhaustedError:
            # the heuristic simplicity estimate misjudged a small dense
            # instance; in auto mode switch to the chain instead of failing
            if not auto:
                raise
            log.info("rejection exhausted %d attempts on %r, switching to MCMC",
                     max_attempts, seq)
            strategy = "mcmc"
            rng = gen
    if strategy == "mcmc":
        budget = swaps if swaps is not None else default_swap_budget(seq.m1 // 2)
        graph = sample_cm_simple_mcmc(seq, rng, budget)
        return SimpleSample(graph, "mcmc", budget)
    raise ValueError(f"unknown strategy {strategy!r}")


# -- soft-constraint (inhomogeneous Bernoulli) ensemble ---------------------------------

_CHUNG_LU_DENSE_LIMIT = 3000


def sample_chung_lu(seq: DegreeSequence, rng, _force_skip_path: bool = False) -> SimpleGraph:
    """Independent edges with P(i~j) = d_i d_j / m1 (no self-loops).

    Requires m_inf^2 < m1 so every probability is below 1. Pairs are
    enumerated directly up to n = 3000; above that a geometric skip over the
    degree-sorted pair sequence draws the same product-Bernoulli law in
    O(n + |E|) expected time.
    """
    if seq.m_inf ** 2 >= seq.m1:
        raise InvalidRegimeError(
            f"need max_degree^2 < m1 for edge probabilities below 1 "
            f"(got {seq.m_inf}^2 >= {seq.m1})"
        )
    gen = as_generator(rng)
    if seq.n <= _CHUNG_LU_DENSE_LIMIT and not _force_skip_path:
        return _chung_lu_dense(seq, gen)
    return _chung_lu_skip(seq, gen)


def _chung_lu_dense(seq: DegreeSequence, gen: np.random.Generator) -> SimpleGraph:
    d = seq.degrees.astype(np.float64)
    m1 = float(seq.m1)
    chunks = []
    for i in range(seq.n - 1):
        p = d[i] * d[i + 1:] / m1
        hits = np.nonzero(gen.random(seq.n - 1 - i) < p)[0]
        if hits.size:
            rows = np.empty((hits.size, 2), dtype=np.int64)
            rows[:, 0] = i
            rows[:, 1] = hits + i + 1
            chunks.append(rows)
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    return SimpleGraph(seq.n, edges, validate=False)


def _chung_lu_skip(seq: DegreeSequence, gen: np.random.Generator) -> SimpleGraph:
    # geometric jumps over descending weights: within row i the bound p only
    # shrinks, so skipping Geometric(p) pairs and accepting with q/p is exact
    order = np.argsort(-seq.degrees, kind="stable")
    w = seq.degrees[order].astype(np.float64)
    m1 = float(seq.m1)
    n = seq.n
    edges = []
    for i in range(n - 1):
        wi = w[i]
        j = i + 1
        p = wi * w[j] / m1
        while j < n:
            if p < 1.0:
                r = gen.random()
                j += int(math.log(r) / math.log1p(-p))
            if j >= n:
                break
            q = wi * w[j] / m1
            if gen.random() < q / p:
                edges.append((order[i], order[j]))
            p = q
            j += 1
    rows = np.array(edges, dtype=np.int64).reshape(-1, 2)
    return SimpleGraph(seq.n, rows, validate=False)


# -- expected adjacency under the matching law ---------------------------------------

@dataclass(frozen=True)
class ExpectedAdjacency:
    """Rank-1 + diagonal form of the expected multigraph adjacency.

    The full matrix is e e^T - diag(d_i/(m1-1)) with e_i = d_i/sqrt(m1-1):
    off-diagonal entries d_i d_j/(m1-1), diagonal d_i (d_i - 1)/(m1-1).
    """

    rank1_vector: np.ndarray
    diagonal_correction: np.ndarray

    @property
    def n(self) -> int:
        return self.rank1_vector.size

    def entry(self, i: int, j: int) -> float:
        e = self.rank1_vector
        if i == j:
            return float(e[i] * e[i] - self.diagonal_correction[i])
        return float(e[i] * e[j])

    def dense(self) -> np.ndarray:
        e = self.rank1_vector
        return np.outer(e, e) - np.diag(self.diagonal_correction)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        e = self.rank1_vector
        return e * (e @ x) - self.diagonal_correction * x


def expected_adjacency_cm(seq: DegreeSequence) -> ExpectedAdjacency:
    d = seq.degrees.astype(np.float64)
    denom = float(seq.m1 - 1)
    return ExpectedAdjacency(rank1_vector=d / np.sqrt(denom),
                             diagonal_correction=d / denom)


def rank_one_direction(seq: DegreeSequence) -> np.ndarray:
    """The vector e with e_i = d_i / sqrt(m1 - 1)."""
    return seq.degrees.astype(np.float64) / math.sqrt(seq.m1 - 1)


def uniform_simple_edge_prob(seq: DegreeSequence, i: int, j: int) -> float:
    """Asymptotic edge probability d_i d_j/(m1 + d_i d_j) under the uniform
    simple graph; accurate only to a (1 + o(1)) factor at finite n."""
    if i == j:
        raise ValueError("edge probability is defined for distinct vertices")
    d = seq.degrees
    prod = float(d[i]) * float(d[j])
    return prod / (seq.m1 + prod)
