"""Satisfactory sets, volume certificates and Folner-pair verification.

Conventions used throughout:

* a vertex v is counted by its *multipliers*: the distinct t in T with
  v t in V (not by its neighbours in the graph);
* "x-good" thresholds are rounded up, so a real threshold x becomes ceil(x);
* every constant is an exact :class:`fractions.Fraction`.
"""
from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

import networkx as nx

from .core import Group, inner_boundary, word_length
from .errors import (CertificateError, DegenerateInputError, HypothesisError, ResourceError, StructuralError,
                     UnsupportedError)

P_PROOF = Fraction(5, 6)
C1_PROOF = Fraction(1, 24)
C_REMOVAL = Fraction(1, 3)


def lemma21_constant(p: Fraction, C1: Fraction) -> Fraction:
    """C with 1 - C = C1 / (1 - p)."""
    p, C1 = Fraction(p), Fraction(C1)
    if not (0 < p < 1 and 0 < C1 < 1 - p):
        raise DegenerateInputError(f"need 0 < p < 1 and 0 < C1 < 1 - p, got p={p}, C1={C1}")
    return 1 - C1 / (1 - p)


C_LEMMA21 = lemma21_constant(P_PROOF, C1_PROOF)  # 3/4
C2_THEOREM = C_REMOVAL * C_LEMMA21  # 1/4


def ceil_frac(x) -> int:
    x = Fraction(x)
    return -((-x.numerator) // x.denominator)


# ---------------------------------------------------------------------------
# T sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TSet:
    elements: tuple
    radius_bound: int
    certified: bool = False
    words: tuple | None = None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def certify_tset(G: Group, elements: Iterable, radius_bound: int, budget: int = 2_000_000) -> TSet:
    """Certify l(t) <= radius_bound for each t (closed form or BFS)."""
    elements = tuple(elements)
    if len(set(elements)) != len(elements):
        raise StructuralError("T must consist of distinct elements")
    for t in elements:
        if word_length(G, t, radius_bound, budget) is None:
            raise StructuralError(f"{G.format_element(t)} has length > {radius_bound}")
    return TSet(elements, radius_bound, True)


def tset_from_words(G: Group, words: Sequence[Sequence[str]]) -> TSet:
    """Certify T by explicit words: each length bound is the length of a word that evaluates to t."""
    elements = tuple(G.evaluate(w) for w in words)
    if len(set(elements)) != len(elements):
        raise StructuralError("words evaluate to repeated elements")
    r = max((len(w) for w in words), default=0)
    return TSet(elements, r, True, tuple(tuple(w) for w in words))


def _require_certified(T: TSet):
    if not isinstance(T, TSet) or not T.certified:
        raise StructuralError("T must be a certified TSet (use certify_tset or tset_from_words)")


# ---------------------------------------------------------------------------
# Goodness graph
# ---------------------------------------------------------------------------


@dataclass
class GoodnessGraph:
    """Vertices with their multiplier maps.

    ``mult[v]`` maps a multiplier key (index into T, or a neighbour for plain
    graphs) to the vertex it reaches. ``weight[v]`` is the number of actual
    elements a vertex stands for (1 except for quotient views of Omega).
    ``edges`` is the simple undirected graph; ``None`` for quotient views,
    where edges are not tracked.
    """

    vertices: list
    mult: dict
    weight: dict
    edges: set | None
    tsize: int

    def counts(self, alive: set | None = None) -> dict:
        if alive is None:
            return {v: len(m) for v, m in self.mult.items()}
        return {v: sum(1 for u in self.mult[v].values() if u in alive) for v in alive}

    def degree(self, v) -> int:
        if self.edges is None:
            raise UnsupportedError("edges are not tracked for this graph")
        return sum(1 for e in self.edges if v in e)

    @property
    def size(self) -> int:
        return sum(self.weight.values())

    @classmethod
    def from_group(cls, G: Group, V, T: TSet) -> "GoodnessGraph":
        _require_certified(T)
        V = V if isinstance(V, (set, frozenset)) else set(V)
        mult, edges = {}, set()
        for v in V:
            m = {}
            for i, t in enumerate(T.elements):
                u = G._multiply(v, t)
                if u in V:
                    m[i] = u
                    if u != v:
                        edges.add(frozenset((u, v)))
            mult[v] = m
        return cls(sorted(V), mult, {v: 1 for v in V}, edges, len(T))

    @classmethod
    def from_omega(cls, omega, T: TSet) -> "GoodnessGraph":
        """Quotient view of an :class:`~folnerkit.nilpotent2.OmegaSet` (exact for counts and removal)."""
        _require_certified(T)
        G = omega.G
        reps = omega.slice_representatives()
        mult = {}
        for v in reps:
            m = {}
            for i, t in enumerate(T.elements):
                u = G._multiply(v, t)
                if G.in_omega(u, omega.n):
                    m[i] = omega.slice_rep(u)
            mult[v] = m
        return cls(reps, mult, {v: omega.coset_size for v in reps}, None, len(T))

    @classmethod
    def from_graph(cls, graph: nx.Graph) -> "GoodnessGraph":
        """Plain graph: each neighbour is its own multiplier (so counts are degrees)."""
        mult = {v: {u: u for u in graph.neighbors(v) if u != v} for v in graph.nodes}
        edges = {frozenset(e) for e in graph.edges if e[0] != e[1]}
        tsize = max((len(m) for m in mult.values()), default=0)
        return cls(sorted(graph.nodes), mult, {v: 1 for v in graph.nodes}, edges, tsize)


@dataclass(frozen=True)
class GoodnessReport:
    counts: dict
    threshold: int
    good_weight: int
    total_weight: int

    @property
    def good_fraction(self) -> Fraction:
        return Fraction(self.good_weight, self.total_weight)


def csc_goodness(G: Group, V, T: TSet, threshold: int | None = None) -> GoodnessReport:
    """Per-vertex multiplier counts and the weight of vertices reaching ``threshold``.

    ``threshold`` defaults to ceil(C #T) with the proof's C = 3/4.
    """
    graph = _graph_for(G, V, T)
    return _goodness(graph, threshold if threshold is not None else ceil_frac(C_LEMMA21 * len(T)))


def _goodness(graph: GoodnessGraph, threshold: int) -> GoodnessReport:
    counts = graph.counts()
    good = sum(graph.weight[v] for v, c in counts.items() if c >= threshold)
    return GoodnessReport(counts, threshold, good, graph.size)


def _graph_for(G, V, T):
    from .nilpotent2 import OmegaSet

    if isinstance(V, OmegaSet):
        if G is not V.G and G.spec != V.G.spec:
            raise StructuralError("Omega set belongs to a different group")
        return GoodnessGraph.from_omega(V, T)
    if not V:
        raise DegenerateInputError("V is empty")
    return GoodnessGraph.from_group(G, V, T)


def _ratio_for(G, V) -> Fraction:
    from .nilpotent2 import OmegaSet

    if isinstance(V, OmegaSet):
        return V.boundary_ratio()
    return inner_boundary(G, V).ratio


def lemma21_check(G: Group, V, T: TSet, p=P_PROOF, C1=C1_PROOF, ratio: Fraction | None = None):
    """Assert the multiplier-count conclusion given a certified boundary ratio <= C1 / r.

    Raises :class:`HypothesisError` if the ratio is too large and
    :class:`CertificateError` if the conclusion fails on data that meets it.
    """
    _require_certified(T)
    C = lemma21_constant(p, C1)
    ratio = _ratio_for(G, V) if ratio is None else Fraction(ratio)
    required = Fraction(C1) / max(T.radius_bound, 1)
    if ratio > required:
        raise HypothesisError(f"boundary ratio {ratio} exceeds C1/r = {required}", ratio, required)
    rep = csc_goodness(G, V, T, ceil_frac(C * len(T)))
    if rep.good_fraction < Fraction(p):
        raise CertificateError(
            f"only {rep.good_fraction} of V has >= {rep.threshold} multipliers; expected >= {p}")
    return rep


# ---------------------------------------------------------------------------
# Removal process
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SatisfactoryCert:
    subset: frozenset
    c: Fraction
    threshold: int
    T: TSet | None
    witness_counts: dict
    weight: dict = field(default_factory=dict)
    rounds: int = 0
    removed_edges: int | None = None
    bad_edges: int | None = None
    ratio: Fraction | None = None
    enforced: bool = True

    @property
    def size(self) -> int:
        return sum(self.weight.get(v, 1) for v in self.subset)

    def __bool__(self):
        return bool(self.subset)

    def verify(self, graph: GoodnessGraph) -> bool:
        counts = graph.counts(set(self.subset))
        return all(c >= self.threshold for c in counts.values())

    def to_json(self, fmt: Callable[[Any], str] = str) -> str:
        return json.dumps({
            "subset": sorted(fmt(v) for v in self.subset),
            "subset_size": self.size,
            "c": str(self.c),
            "threshold": self.threshold,
            "T_size": len(self.T) if self.T is not None else None,
            "T_radius": self.T.radius_bound if self.T is not None else None,
            "rounds": self.rounds,
            "removed_edges": self.removed_edges,
            "bad_edges": self.bad_edges,
            "ratio": None if self.ratio is None else str(self.ratio),
            "enforced": self.enforced,
        }, sort_keys=True)


def extract_satisfactory(graph: GoodnessGraph, m: int, c) -> SatisfactoryCert:
    """Remove, round by round, every vertex with fewer than ceil(c m) surviving multipliers.

    Also counts removed edges and the edges touching a vertex that was not
    m-good at the start (the quantities of the edge-accounting argument).
    """
    c = Fraction(c)
    if not 0 < c < 1:
        raise DegenerateInputError("c must lie in (0, 1)")
    threshold = ceil_frac(c * m)
    alive = set(graph.vertices)
    initial = graph.counts()
    bad = {v for v, k in initial.items() if k < m}
    bad_edges = removed_edges = None
    if graph.edges is not None:
        bad_edges = sum(1 for e in graph.edges if e & bad)
        removed_edges = 0
        incident = {v: [] for v in graph.vertices}
        for e in graph.edges:
            for v in e:
                incident[v].append(e)
        live_edges = set(graph.edges)
    # reverse multiplier index so only affected vertices are recounted
    back = {v: [] for v in graph.vertices}
    for v, mm in graph.mult.items():
        for u in mm.values():
            back[u].append(v)
    counts = dict(initial)
    rounds = 0
    doomed = {v for v in alive if counts[v] < threshold}
    while doomed:
        rounds += 1
        alive -= doomed
        if graph.edges is not None:
            for v in doomed:
                for e in incident[v]:
                    if e in live_edges:
                        live_edges.discard(e)
                        removed_edges += 1
        touched = set()
        for u in doomed:
            for v in back[u]:
                if v in alive:
                    touched.add(v)
        for v in touched:
            counts[v] = sum(1 for u in graph.mult[v].values() if u in alive)
        doomed = {v for v in touched if counts[v] < threshold}
    witness = {v: counts[v] for v in alive}
    return SatisfactoryCert(frozenset(alive), c, threshold, None, witness,
                            {v: graph.weight[v] for v in alive}, rounds, removed_edges, bad_edges)


def lemma22_edge_bound(cert: SatisfactoryCert) -> Fraction | None:
    """The edge-accounting bound C1 / (1 - c) on removed edges (None if edges untracked)."""
    if cert.bad_edges is None:
        return None
    return Fraction(cert.bad_edges) / (1 - cert.c)


def theorem11_pipeline(G: Group, V, T: TSet, enforce: bool = True,
                       ratio: Fraction | None = None) -> SatisfactoryCert:
    """Certified subset V' of V in which every vertex has >= ceil(#T / 4) multipliers.

    Precondition: boundary ratio <= (1/24) / r, r the radius bound of T.
    With p = 5/6, C1 = 1/24 the count lemma gives C = 3/4; removal uses
    c = 1/3 on m = ceil(3 #T / 4), so survivors have >= ceil(m / 3) >= #T / 4
    multipliers. ``enforce=False`` skips the precondition and returns
    whatever the removal leaves (possibly empty).
    """
    _require_certified(T)
    if len(T) == 0:
        raise DegenerateInputError("T is empty")
    ratio = _ratio_for(G, V) if ratio is None else Fraction(ratio)
    required = C1_PROOF / max(T.radius_bound, 1)
    if enforce and ratio > required:
        raise HypothesisError(
            f"boundary ratio {ratio} exceeds (1/24)/r = {required} (r = {T.radius_bound})",
            ratio, required)
    graph = _graph_for(G, V, T)
    m = ceil_frac(C_LEMMA21 * len(T))
    if enforce:
        rep = _goodness(graph, m)
        if rep.good_fraction < P_PROOF:
            raise CertificateError(f"count lemma failed: good fraction {rep.good_fraction} < 5/6")
    cert = extract_satisfactory(graph, m, C_REMOVAL)
    if cert.threshold < ceil_frac(C2_THEOREM * len(T)):
        raise CertificateError("internal: removal threshold below #T/4")
    if enforce and not cert.subset:
        raise CertificateError("removal emptied V although the hypotheses hold")
    return SatisfactoryCert(cert.subset, C2_THEOREM, cert.threshold, T, cert.witness_counts,
                            cert.weight, cert.rounds, cert.removed_edges, cert.bad_edges,
                            ratio, enforce)


# ---------------------------------------------------------------------------
# Random graphs for the removal lemma
# ---------------------------------------------------------------------------


def random_good_graph(rng: random.Random, n: int, m: int, p: Fraction, style: str = "mixed") -> nx.Graph:
    """A graph on n vertices in which at least p n vertices have degree >= m."""
    n_good = ceil_frac(Fraction(p) * n)
    if n_good <= m:
        raise DegenerateInputError("need more than m good vertices")
    g = nx.Graph()
    g.add_nodes_from(range(n))
    good = list(range(n_good))
    bad = list(range(n_good, n))
    if style in ("regular", "mixed"):
        deg = m if (m * n_good) % 2 == 0 else m + 1
        g.add_edges_from(nx.random_regular_graph(deg, n_good, seed=rng.randrange(2**32)).edges)
    if style in ("dense", "mixed"):
        q = rng.uniform(0.0, 2.0 * m / n_good)
        for i in good:
            for j in range(i + 1, n_good):
                if rng.random() < q:
                    g.add_edge(i, j)
    for v in good:
        while g.degree(v) < m:
            u = rng.randrange(n_good)
            if u != v:
                g.add_edge(u, v)
    # bad vertices get fewer than m edges, all to good vertices
    for v in bad:
        for u in rng.sample(good, rng.randrange(0, m)):
            g.add_edge(v, u)
    return g


# ---------------------------------------------------------------------------
# Product volume bound and the lower-bound report
# ---------------------------------------------------------------------------


def _check_blocks_commute(G: Group, blocks, commute=None):
    commute = commute or G.commute
    for i, Bi in enumerate(blocks):
        for Bj in blocks[i + 1:]:
            for x in Bi:
                for y in Bj:
                    if not commute(x, y):
                        raise StructuralError("elements of different blocks do not commute")


def m_k(G: Group, V, blocks, k: int, g) -> int:
    """M_k(g): number of blocks with at least k distinct non-identity s such that g s is in V."""
    e = G.identity
    return sum(1 for S in blocks if sum(1 for s in set(S) if s != e and G._multiply(g, s) in V) >= k)


def product_volume_bound(G: Group, V, blocks, k: int, check_commute: bool = True) -> int:
    """(1 + k)^m with m = min over g in V of M_k(g); asserts |V| >= (1 + k)^m."""
    if k < 1:
        raise DegenerateInputError("k must be >= 1")
    V = V if isinstance(V, (set, frozenset)) else set(V)
    if not V:
        raise DegenerateInputError("V is empty")
    if check_commute:
        _check_blocks_commute(G, blocks)
    m = min(m_k(G, V, blocks, k, g) for g in V)
    bound = (1 + k) ** m
    if len(V) < bound:
        raise CertificateError(f"|V| = {len(V)} < (1+k)^m = {bound}")
    return bound


@dataclass(frozen=True)
class ExhaustReport:
    subsets: int
    checks: int
    counterexamples: tuple  # (mask, k, m) triples
    tight: int  # checks with |V| == (1 + k)^m and m > 0


def exhaust_product_bound(G: Group, elements, blocks, ks, max_elements: int = 20) -> ExhaustReport:
    """Check |V| >= (1 + k)^m over every non-empty V inside ``elements``, for each k in ``ks``.

    ``elements`` must be closed under right multiplication by the block
    elements. The multiplication table comes from the group law once; the
    subsets are then scanned as bitmasks.
    """
    import numpy as np

    elements = list(elements)
    if len(elements) > max_elements:
        raise ResourceError(f"{len(elements)} elements: 2^{len(elements)} subsets exceed the limit")
    _check_blocks_commute(G, blocks)
    pos = {x: i for i, x in enumerate(elements)}
    e = G.identity
    table = []
    for g in elements:
        row = []
        for S in blocks:
            idx = []
            for s in dict.fromkeys(S):
                if s == e:
                    continue
                y = G._multiply(g, s)
                if y not in pos:
                    raise StructuralError("elements are not closed under the block elements")
                idx.append(pos[y])
            row.append(idx)
        table.append(row)
    masks = np.arange(1, 1 << len(elements), dtype=np.int64)
    bit = [((masks >> i) & 1).astype(np.int32) for i in range(len(elements))]
    size = sum(bit)
    hits = [[sum(bit[j] for j in idx) if idx else np.zeros_like(masks, dtype=np.int32) for idx in row]
            for row in table]
    bad, tight, checks = [], 0, 0
    for k in ks:
        if k < 1:
            raise DegenerateInputError("k must be >= 1")
        m = np.full(masks.shape, np.iinfo(np.int32).max, dtype=np.int64)
        for i in range(len(elements)):
            Mk = sum((h >= k).astype(np.int32) for h in hits[i]) if hits[i] else np.zeros_like(masks)
            m = np.where(bit[i] == 1, np.minimum(m, Mk), m)
        need = (1 + k) ** m
        fail = size < need
        for idx in np.flatnonzero(fail):
            bad.append((int(masks[idx]), k, int(m[idx])))
        tight += int(((size == need) & (m > 0)).sum())
        checks += len(masks)
    return ExhaustReport(len(masks), checks, tuple(bad), tight)


@dataclass(frozen=True)
class BlockWitness:
    element: Any
    length: int
    word: tuple | None = None


@dataclass(frozen=True)
class LowerBoundReport:
    n: int
    k: int
    N: int
    blocks: tuple
    C: Fraction
    k_prime: Fraction
    exponent: Fraction  # (C / (2 - C)) N

    @property
    def bound_log2(self) -> float:
        return float(self.exponent) * math.log2(float(1 + self.k_prime))

    def log2_at_least(self, target) -> bool:
        """Exact test of exponent * log2(k' + 1) >= target."""
        target = Fraction(target)
        base = 1 + self.k_prime
        if base == 2:
            return self.exponent >= target
        if target <= 0:
            return True
        # b^e >= 2^t  <=>  b^(e q) >= 2^(t q), q clearing both denominators
        q = math.lcm(self.exponent.denominator, target.denominator)
        return base ** int(self.exponent * q) >= 2 ** int(target * q)

    def to_row(self) -> dict:
        return {"n": self.n, "k": self.k, "N": self.N, "C": str(self.C), "k_prime": str(self.k_prime),
                "exponent": str(self.exponent), "bound_log2": repr(self.bound_log2)}


def certify_block_witnesses(G: Group, block_words) -> list[list[BlockWitness]]:
    """Blocks given as lists of (element, word): each word must evaluate to its element."""
    out = []
    for block in block_words:
        row = []
        for x, w in block:
            if G.evaluate(w) != x:
                raise StructuralError(f"word {' '.join(w)} does not evaluate to {G.format_element(x)}")
            row.append(BlockWitness(x, len(w), tuple(w)))
        out.append(row)
    return out


def corollary12_bound(G: Group, blocks, n: int, k: int, C=C2_THEOREM, commute=None,
                      check_commute: bool = True) -> LowerBoundReport:
    """Lower bound log2 FOL(n) >= (C/(2-C)) N(n,k) log2(k'+1), k' = max(1, C k / 2).

    ``blocks`` are lists of :class:`BlockWitness` (length-certified elements
    of commuting subgroups). v(i, n) counts the distinct non-identity
    elements of block i of length <= n; N(n, k) the blocks with v >= k.
    """
    if n < 0 or k < 1:
        raise DegenerateInputError("need n >= 0 and k >= 1")
    C = Fraction(C)
    e = G.identity
    used = []
    for block in blocks:
        if not all(isinstance(b, BlockWitness) for b in block):
            raise StructuralError("blocks must contain certified BlockWitness entries")
        short = {}
        for b in block:
            if b.element != e and b.length <= n:
                short.setdefault(b.element, b)
        if len(short) >= k:
            used.append(tuple(sorted(short.values(), key=lambda b: b.length))[:k])
    if check_commute:
        _check_blocks_commute(G, [[b.element for b in blk] for blk in used], commute)
    N = len(used)
    k_prime = max(Fraction(1), C * k / 2)
    return LowerBoundReport(n, k, N, tuple(used), C, k_prime, C / (2 - C) * N)


# ---------------------------------------------------------------------------
# Folner pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairsReport:
    size_ok: bool
    depth: int  # d(F', G \ F), capped at n
    depth_ok: bool
    controlled_ok: bool | None
    first_violation: str | None
    ratio: Fraction

    @property
    def ok(self) -> bool:
        return self.first_violation is None


def distance_to_complement(G: Group, Fp, F, cap: int) -> int:
    """min over x in F' of the distance from x to G minus F, or ``cap`` if at least ``cap``."""
    gens = [g for _, g in G.symmetric_generators]
    seen = set(Fp)
    frontier = list(Fp)
    for layer in range(1, cap + 1):
        nxt = []
        for x in frontier:
            for s in gens:
                y = G._multiply(x, s)
                if y in seen:
                    continue
                if y not in F:
                    return layer
                seen.add(y)
                nxt.append(y)
        frontier = nxt
        if not frontier:
            break
    return cap


def folner_pairs_check(G: Group, Fp, F, n: int, C, controlled: bool = False,
                       budget: int = 2_000_000) -> PairsReport:
    """(1) #F <= C #F'; (2) d(F', G minus F) >= n; (3') F inside B(e, C n) when controlled."""
    Fp = Fp if isinstance(Fp, (set, frozenset)) else set(Fp)
    F = F if isinstance(F, (set, frozenset)) else set(F)
    if not Fp:
        raise DegenerateInputError("F' is empty")
    if not Fp <= F:
        raise StructuralError("F' must be a subset of F")
    C = Fraction(C)
    ratio = Fraction(len(F), len(Fp))
    size_ok = ratio <= C
    depth = distance_to_complement(G, Fp, F, n)
    depth_ok = depth >= n
    controlled_ok = None
    if controlled:
        rmax = math.floor(C * n)
        controlled_ok = all(word_length(G, x, rmax, budget) is not None for x in F)
    first = None
    if not size_ok:
        first = "(1) size"
    elif not depth_ok:
        first = "(2) depth"
    elif controlled and not controlled_ok:
        first = "(3') controlled"
    return PairsReport(size_ok, depth, depth_ok, controlled_ok, first, ratio)


def lamplighter_pair(r: int):
    """F'_r = {supp in [-r, r], |z| <= r // 2} inside F_r = {supp in [-r, r], |z| <= r} (Z wr Z/2)."""
    from .wreath import LampElement

    if r < 0:
        raise DegenerateInputError("r must be >= 0")
    pts = list(range(-r, r + 1))
    configs = []
    for mask in range(1 << len(pts)):
        configs.append(tuple(((pts[i],), 1) for i in range(len(pts)) if mask >> i & 1))
    F = {LampElement(cfg, (z,)) for cfg in configs for z in range(-r, r + 1)}
    Fp = {x for x in F if abs(x.pos[0]) <= r // 2}
    return Fp, F


# ---------------------------------------------------------------------------
# Two-sided certificate for G_{D,2,k} at finite n
# ---------------------------------------------------------------------------

LOG2E_LOWER = Fraction(144, 100)  # < log2(e)
LOG2E_UPPER = Fraction(14427, 10000)  # > log2(e)
SANDWICH_C = Fraction(1, 32)


def tau_three_halves(x) -> int:
    """floor(x^(3/2)) for a non-negative rational x, exactly."""
    x = Fraction(x)
    if x < 0:
        raise DegenerateInputError("x must be >= 0")
    return math.isqrt(x.numerator ** 3 // x.denominator ** 3)


@dataclass(frozen=True)
class SandwichRow:
    n: int
    omega_log2_excess: int  # floor(1.44 X) - log2-ceiling of |Omega(2n-1)|; >= 0 means upper side holds
    upper_ok: bool
    upper_literal_ok: bool  # same test with Omega(n) in place of Omega(2n-1)
    lower_target: Fraction  # c (n + tau(c n)), natural-log units
    commutator_N: int
    lamplighter_N: int
    lower_ok: bool

    def to_row(self) -> dict:
        return {"n": self.n, "upper_ok": self.upper_ok, "upper_literal_ok": self.upper_literal_ok,
                "lower_target": str(self.lower_target), "commutator_N": self.commutator_N,
                "lamplighter_N": self.lamplighter_N, "lower_ok": self.lower_ok}


def _ln_at_most(size: int, X) -> bool:
    """Sufficient exact test of ln(size) <= X via size <= 2^floor(1.44 X)."""
    return size <= 2 ** math.floor(LOG2E_LOWER * Fraction(X))


def commutator_blocks(G, n_max: int) -> list[list[BlockWitness]]:
    """Distinct central b_{i,i+d} (d not killed) with word length <= n_max, one block each."""
    from .nilpotent2 import commutator_word

    seen = {}
    for d in range(1, n_max // 4 + 1):
        if d in G.D:
            continue
        for i in range(-n_max, n_max + 1):
            w = commutator_word(i, i + d)
            if len(w) > n_max:
                continue
            x = G.evaluate(w)
            if x == G.identity:
                continue
            if x not in seen or len(w) < len(seen[x]):
                seen[x] = tuple(w)
    return [[BlockWitness(x, len(w), w)] for x, w in sorted(seen.items(), key=lambda kv: (len(kv[1]), kv[1]))]


def lamp_blocks(n_max: int) -> tuple[Any, list[list[BlockWitness]]]:
    """Lamps delta_i in the lamplighter quotient, word t^i b t^-i of length 2|i|+1."""
    from .wreath import WreathGroup

    L = WreathGroup(2, 1, ("t", "b"))
    blocks = []
    for i in range(-(n_max // 2), n_max // 2 + 1):
        step = "t" if i >= 0 else "t^-1"
        back = "t^-1" if i >= 0 else "t"
        w = (step,) * abs(i) + ("b",) + (back,) * abs(i)
        blocks.append([BlockWitness(L.evaluate(w), len(w), w)])
    return L, blocks


def corollary32_sandwich(n_max: int, tau: Callable = tau_three_halves, c=SANDWICH_C,
                         horizon: int | None = None) -> list[SandwichRow]:
    """Finite-n certificate for the group whose D and k are prescribed by ``tau``.

    Upper: ln|Omega_{D,k}(2n-1)| <= 4n + 2 tau_{D,k}(2n) (the Omega set has
    boundary ratio 1/n), and the same with Omega(n). Lower: the larger of two
    block-volume reports with k = 1, one from central commutators inside the
    group and one from lamps of its lamplighter quotient (Folner functions
    do not increase under quotients), compared with c (n + tau(c n)).
    """
    from .nilpotent2 import Nil2Group, omega_cardinality, prescribe_from_tau, tau_Dk

    if n_max < 1:
        raise DegenerateInputError("n_max must be >= 1")
    c = Fraction(c)
    horizon = horizon or 4 * n_max + 4
    D, k = prescribe_from_tau(lambda m: tau(Fraction(m)), horizon)
    G = Nil2Group(D, k, "Dk")
    cblocks = commutator_blocks(G, n_max)
    _check_blocks_commute(G, [[b.element for b in blk] for blk in cblocks])
    L, lblocks = lamp_blocks(n_max)
    _check_blocks_commute(L, [[b.element for b in blk] for blk in lblocks])
    rows = []
    for n in range(1, n_max + 1):
        X = 4 * n + 2 * tau_Dk(G, 2 * n)
        big = omega_cardinality(G, 2 * n - 1) if n > 1 else omega_cardinality(G, 1)
        upper_ok = _ln_at_most(big, X)
        literal_ok = _ln_at_most(omega_cardinality(G, n), X)
        excess = math.floor(LOG2E_LOWER * X) - (big - 1).bit_length()
        target = c * (n + tau(c * n))
        need = target * LOG2E_UPPER  # log2 units
        rc = corollary12_bound(G, cblocks, n, 1, check_commute=False)
        rl = corollary12_bound(L, lblocks, n, 1, check_commute=False)
        lower_ok = rc.log2_at_least(need) or rl.log2_at_least(need)
        rows.append(SandwichRow(n, excess, upper_ok, literal_ok, target, rc.N, rl.N, lower_ok))
    return rows


# ---------------------------------------------------------------------------
# Grigorchuk groups: level-k rigid stabilizers
# ---------------------------------------------------------------------------

GRIG_C = C2_THEOREM / (2 - C2_THEOREM)  # log2 FOL(6 * 2^k) >= GRIG_C * 2^k


def grigorchuk_bound(k: int, omega="|012") -> LowerBoundReport:
    """Block-volume report at n = 6 * 2^k from the 2^k level-k witnesses (k = 1 per block)."""
    from . import grigorchuk as gr

    if k < 0:
        raise DegenerateInputError("k must be >= 0")
    G = gr.GrigorchukGroup(omega)
    wit = gr.level_witnesses(k, omega)
    blocks = []
    for u, w in sorted(wit.items()):
        check = gr.verify_rist(w, u, omega)
        if not check.ok:
            raise CertificateError(f"witness for {u} is not in the rigid stabilizer: {check}")
        blocks.append([BlockWitness(G.element(w.letters), len(w.letters), tuple(w.letters))])
    rep = corollary12_bound(G, blocks, 6 * 2 ** k, 1,
                            commute=lambda x, y: gr.commute(x.word, y.word, omega))
    if rep.N != 2 ** k:
        raise CertificateError(f"expected {2 ** k} usable blocks, got {rep.N}")
    if not rep.log2_at_least(GRIG_C * 2 ** k):
        raise CertificateError("bound below C * 2^k")
    return rep
