"""Step-2 nilpotent-by-cyclic groups G_{Z,Nil,2}, G_{D,2} and G_{D,2,k}.

The normal subgroup is generated by involutions b_i (i in Z) with central
commutators b_{i,j} = [b_i, b_j] of order two; Z acts by shifting indices.
An element is stored as (linear, quad, z): the ascending product of the
b_i with i in ``linear``, times the central b_{i,j} for (i, j) in ``quad``,
times z_0^z. Quotients kill b_{i,j} with j - i in D, and in the k-variant
identify b_{i,i+d} with b_{i+k_d, i+d+k_d}, keeping the representative with
0 <= i < k_d.
"""
from __future__ import annotations

import itertools
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .core import DEFAULT_BUDGET, Group
from .errors import DegenerateInputError, ResourceError, StructuralError


@dataclass(frozen=True, order=True, slots=True)
class Nil2Element:
    linear: tuple = ()
    quad: tuple = ()
    z: int = 0


# ---------------------------------------------------------------------------
# D and k parameter blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DSpec:
    """A subset of the positive integers: explicit up to ``horizon``, constant beyond."""

    members: frozenset = frozenset()
    horizon: int = 0
    default_beyond: bool = False

    def __post_init__(self):
        members = frozenset(int(m) for m in self.members)
        if any(m < 1 for m in members):
            raise StructuralError(f"D must consist of positive integers, got {sorted(members)}")
        horizon = max([self.horizon, *members]) if members else self.horizon
        # canonical: drop the top of the explicit window while it agrees with the default
        while horizon > 0 and ((horizon in members) == self.default_beyond):
            horizon -= 1
        members = frozenset(m for m in members if m <= horizon)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "horizon", horizon)

    def __contains__(self, d: int) -> bool:
        if d <= self.horizon:
            return d in self.members
        return self.default_beyond

    @classmethod
    def empty(cls):
        return cls()

    @classmethod
    def all(cls):
        return cls(frozenset(), 0, True)

    @classmethod
    def finite(cls, members: Iterable[int]):
        return cls(frozenset(members), 0, False)

    @classmethod
    def from_predicate(cls, pred: Callable[[int], bool], horizon: int, default_beyond: bool = False):
        return cls(frozenset(d for d in range(1, horizon + 1) if pred(d)), horizon, default_beyond)

    @classmethod
    def evens(cls, horizon: int = 256):
        """Even integers up to ``horizon`` (nothing beyond)."""
        return cls.from_predicate(lambda d: d % 2 == 0, horizon)

    def to_json(self):
        return {"members": sorted(self.members), "horizon": self.horizon,
                "default_beyond": self.default_beyond}

    @classmethod
    def from_json(cls, data):
        if data in ("all", "*"):
            return cls.all()
        if isinstance(data, (list, tuple)):
            return cls.finite(data)
        return cls(frozenset(data.get("members", ())), data.get("horizon", 0),
                   bool(data.get("default_beyond", False)))


@dataclass(frozen=True)
class KSeq:
    """Orbit lengths k_d >= 1 for the relations b_{i,i+d} = b_{i+k_d,i+d+k_d}.

    ``default`` applies to differences missing from ``table``; ``None`` means
    no identification for that difference.
    """

    table: Mapping[int, int] = field(default_factory=dict)
    default: int | None = None

    def __post_init__(self):
        table = {int(d): int(k) for d, k in dict(self.table).items()}
        for d, k in table.items():
            if d < 1 or k < 1:
                raise StructuralError(f"k_{d} = {k}: need d >= 1 and k_d >= 1")
        if self.default is not None and self.default < 1:
            raise StructuralError(f"default k must be >= 1, got {self.default}")
        object.__setattr__(self, "table", tuple(sorted(table.items())))

    def __call__(self, d: int) -> int | None:
        for dd, k in self.table:
            if dd == d:
                return k
        return self.default

    def __hash__(self):
        return hash((self.table, self.default))

    @classmethod
    def constant(cls, k: int):
        return cls({}, k)

    def to_json(self):
        return {"table": {str(d): k for d, k in self.table}, "default": self.default}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, int):
            return cls.constant(data)
        return cls({int(d): k for d, k in data.get("table", {}).items()}, data.get("default"))


def prescribe_from_tau(tau: Callable[[int], int], horizon: int) -> tuple[DSpec, KSeq]:
    """D and k from a prescribed function: n in D iff floor(tau(n)) == floor(tau(n-1)),
    otherwise k_n = floor(tau(n)) - floor(tau(n-1)). Differences past ``horizon`` are killed."""
    D, k = set(), {}
    for n in range(1, horizon + 1):
        jump = int(tau(n)) - int(tau(n - 1))
        if jump == 0:
            D.add(n)
        elif jump > 0:
            k[n] = jump
        else:
            raise StructuralError("tau must be non-decreasing")
    return DSpec(frozenset(D), horizon, True), KSeq(k, None)


# ---------------------------------------------------------------------------
# The group
# ---------------------------------------------------------------------------

_VARIANTS = ("nil2", "D", "Dk")


class Nil2Group(Group):
    """G_{Z,Nil,2} (variant "nil2"), G_{D,2} ("D") or G_{D,2,k} ("Dk").

    Generators: ``b`` = b_0 (an involution) and ``z`` = z_0, the shift.
    """

    family = "nil2"

    def __init__(self, D: DSpec | None = None, k: KSeq | None = None, variant: str | None = None,
                 generator_labels=None):
        D = D if D is not None else DSpec.empty()
        if variant is None:
            variant = "Dk" if k is not None else ("D" if D != DSpec.empty() else "nil2")
        if variant not in _VARIANTS:
            raise StructuralError(f"variant must be one of {_VARIANTS}, got {variant!r}")
        if variant == "nil2" and D != DSpec.empty():
            raise StructuralError("variant 'nil2' has D = {}")
        if variant != "Dk" and k is not None:
            raise StructuralError(f"variant {variant!r} takes no k sequence")
        if variant == "Dk" and k is None:
            raise StructuralError("variant 'Dk' needs a k sequence")
        self.D = D
        self.k = k
        self.variant = variant
        super().__init__(generator_labels)

    @classmethod
    def from_params(cls, params, generator_labels=None):
        extra = set(params) - {"variant", "D", "k"}
        if extra:
            raise StructuralError(f"unknown nil2 parameters {sorted(extra)}")
        try:
            D = DSpec.from_json(params["D"]) if "D" in params else None
        except (TypeError, ValueError, AttributeError) as exc:
            raise StructuralError(f"malformed D spec {params['D']!r}: {exc}") from exc
        try:
            k = KSeq.from_json(params["k"]) if params.get("k") is not None else None
        except (TypeError, ValueError, AttributeError) as exc:
            raise StructuralError(f"malformed k spec {params['k']!r}: {exc}") from exc
        return cls(D, k, params.get("variant"), generator_labels)

    def params(self):
        out = {"variant": self.variant, "D": self.D.to_json()}
        if self.k is not None:
            out["k"] = self.k.to_json()
        return out

    def _declared_generators(self):
        return {"b": Nil2Element((0,), (), 0), "z": Nil2Element((), (), 1)}

    @property
    def identity(self):
        return Nil2Element()

    # -- central reduction ---------------------------------------------
    def reduce_pair(self, i: int, j: int):
        """Canonical representative of b_{i,j} (i < j), or None if it is killed."""
        d = j - i
        if d in self.D:
            return None
        if self.k is not None:
            kd = self.k(d)
            if kd is not None:
                i %= kd
        return (i, i + d)

    def _reduce_toggles(self, acc: set, pairs: Iterable[tuple[int, int]]):
        for i, j in pairs:
            p = self.reduce_pair(i, j)
            if p is not None:
                acc ^= {p}
        return acc

    def _multiply(self, x: Nil2Element, y: Nil2Element) -> Nil2Element:
        s = x.z
        if not y.linear and not y.quad:
            return Nil2Element(x.linear, x.quad, x.z + y.z)
        ylin = [i + s for i in y.linear]
        quad = set(x.quad)
        if y.quad:
            if s:
                self._reduce_toggles(quad, ((i + s, j + s) for i, j in y.quad))
            else:
                quad ^= set(y.quad)
        # moving each letter of y left past the larger letters of x toggles one commutator
        xl = x.linear
        toggles = []
        for b in ylin:
            for a in xl[bisect_right(xl, b):]:
                toggles.append((b, a))
        self._reduce_toggles(quad, toggles)
        linear = tuple(sorted(set(xl).symmetric_difference(ylin)))
        return Nil2Element(linear, tuple(sorted(quad)), x.z + y.z)

    def inverse(self, x: Nil2Element) -> Nil2Element:
        # (L Q z^m)^-1 = z^-m Q rev(L); reversing L toggles every pair of its letters
        quad = set(x.quad)
        self._reduce_toggles(quad, itertools.combinations(x.linear, 2))
        if x.z:
            shifted = set()
            self._reduce_toggles(shifted, ((i - x.z, j - x.z) for i, j in quad))
            quad = shifted
        return Nil2Element(tuple(i - x.z for i in x.linear), tuple(sorted(quad)), -x.z)

    def contains(self, x) -> bool:
        if not isinstance(x, Nil2Element):
            return False
        if list(x.linear) != sorted(set(x.linear)):
            return False
        if list(x.quad) != sorted(set(x.quad)):
            return False
        return all(i < j and self.reduce_pair(i, j) == (i, j) for i, j in x.quad)

    def check(self, x) -> Nil2Element:
        if not self.contains(x):
            raise StructuralError(f"{x!r} violates the canonical form of {self!r}")
        return x

    # -- named elements ------------------------------------------------
    def b(self, i: int) -> Nil2Element:
        return Nil2Element((i,), (), 0)

    def central(self, i: int, j: int) -> Nil2Element:
        """b_{min,max} as a canonical element (identity if killed)."""
        i, j = min(i, j), max(i, j)
        p = self.reduce_pair(i, j)
        return Nil2Element((), () if p is None else (p,), 0)

    def commutator(self, x, y):
        inv = self.inverse
        return self._multiply(self._multiply(inv(x), inv(y)), self._multiply(x, y))

    # -- printing ------------------------------------------------------
    def format_element(self, x):
        lin = ",".join(map(str, x.linear))
        quad = ",".join(f"({i},{j})" for i, j in x.quad)
        return f"lin{{{lin}}}|quad{{{quad}}}|{x.z}"

    _PARSE = re.compile(r"^lin\{([-\d,\s]*)\}\|quad\{([-\d,()\s]*)\}\|(-?\d+)$")

    def parse_element(self, text):
        m = self._PARSE.match(text.strip())
        if not m:
            raise StructuralError(f"not a nil2 element: {text!r}")
        lin = tuple(int(s) for s in m.group(1).split(",") if s.strip())
        quad = tuple((int(a), int(b)) for a, b in re.findall(r"\((-?\d+),(-?\d+)\)", m.group(2)))
        return self.check(Nil2Element(lin, quad, int(m.group(3))))

    # -- the Folner sets Omega -----------------------------------------
    def admissible_pairs(self, n: int) -> list[tuple[int, int]]:
        """Canonical central pairs with both indices in [0, n]."""
        pairs = []
        for d in range(1, n + 1):
            if d in self.D:
                continue
            kd = self.k(d) if self.k is not None else None
            count = n + 1 - d if kd is None else min(kd, n + 1 - d)
            pairs.extend((i, i + d) for i in range(count))
        return pairs

    def in_omega(self, x: Nil2Element, n: int) -> bool:
        # canonical elements keep linear sorted and quad sorted by first index
        lin, quad = x.linear, x.quad
        return (0 <= x.z <= n and (not lin or (lin[0] >= 0 and lin[-1] <= n))
                and (not quad or (quad[0][0] >= 0 and max(j for _, j in quad) <= n)))


def omega_cardinality(G: Nil2Group, n: int) -> int:
    """(n+1) 2^(n+1+sum_{d in [1,n] minus D} min(n+1-d, k_d)), with k_d = infinity when absent."""
    if n < 1:
        raise DegenerateInputError("n must be >= 1")
    expo = n + 1
    for d in range(1, n + 1):
        if d in G.D:
            continue
        kd = G.k(d) if G.k is not None else None
        expo += n + 1 - d if kd is None else min(n + 1 - d, kd)
    return (n + 1) * 2 ** expo


def omega_set(G: Nil2Group, n: int, budget: int = DEFAULT_BUDGET) -> set:
    """Omega(n): z in [0, n] and the configuration contained in [0, n]."""
    if n < 1:
        raise DegenerateInputError("n must be >= 1")
    pairs = G.admissible_pairs(n)
    size = (n + 1) * 2 ** (n + 1 + len(pairs))
    if size > budget:
        raise ResourceError(f"|Omega({n})| = {size} exceeds budget {budget}", layer=n)
    out = set()
    lin_sets = [tuple(c) for r in range(n + 2) for c in itertools.combinations(range(n + 1), r)]
    quad_sets = [tuple(c) for r in range(len(pairs) + 1) for c in itertools.combinations(pairs, r)]
    for z in range(n + 1):
        for lin in lin_sets:
            for q in quad_sets:
                out.add(Nil2Element(lin, tuple(sorted(q)), z))
    return out


def omega_boundary_ratio(G: Nil2Group, n: int) -> Fraction:
    """Exact inner-boundary ratio of Omega(n) without listing the central part.

    Right multiplication by a generator sends (L, Q, z) to (L', Q xor Delta, z')
    where L', z', Delta depend only on (L, z): the central part rides along.
    Omega(n) is a full product over admissible Q, so (L, Q, z) is a boundary
    point iff (L, {}, z) is. The ratio therefore equals the boundary fraction
    of the (L, z) slice, which is enumerated here with actual group products.
    """
    if n < 1:
        raise DegenerateInputError("n must be >= 1")
    gens = [g for _, g in G.symmetric_generators]
    boundary = 0
    total = 0
    for r in range(n + 2):
        for lin in itertools.combinations(range(n + 1), r):
            for z in range(n + 1):
                x = Nil2Element(lin, (), z)
                total += 1
                if any(not G.in_omega(G._multiply(x, s), n) for s in gens):
                    boundary += 1
    return Fraction(boundary, total)


def commutator_rank(G: Nil2Group, n: int) -> int:
    """GF(2)-rank of the subgroup generated by [b_i, b_j], 0 <= i < j <= n.

    Each commutator is computed with the group law; the rank comes from
    Gaussian elimination on their central parts.
    """
    index: dict = {}
    basis: dict[int, int] = {}
    rank = 0
    for i, j in itertools.combinations(range(n + 1), 2):
        c = G.commutator(G.b(i), G.b(j))
        if c.linear or c.z:
            raise StructuralError(f"[b_{i}, b_{j}] is not central: {c}")
        vec = 0
        for p in c.quad:
            vec |= 1 << index.setdefault(p, len(index))
        while vec:
            top = vec.bit_length() - 1
            if top in basis:
                vec ^= basis[top]
            else:
                basis[top] = vec
                rank += 1
                break
    return rank


def rho_D(G_or_D, n: int) -> int:
    """#([1, n] minus D)."""
    D = G_or_D.D if isinstance(G_or_D, Nil2Group) else G_or_D
    return sum(1 for d in range(1, n + 1) if d not in D)


def tau_Dk(G: Nil2Group, n: int) -> int:
    """sum over j in [1, n] minus D of min(k_j, n)."""
    total = 0
    for j in range(1, n + 1):
        if j in G.D:
            continue
        kj = G.k(j) if G.k is not None else None
        total += n if kj is None else min(kj, n)
    return total


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------


def free_reduce(word: list[str]) -> list[str]:
    """Cancel z z^-1 pairs and b b pairs."""
    out: list[str] = []
    for w in word:
        if out and ((w == "b" and out[-1] == "b") or {w, out[-1]} == {"z", "z^-1"}):
            out.pop()
        else:
            out.append(w)
    return out


def b_word(i: int) -> list[str]:
    up, down = ("z", "z^-1") if i >= 0 else ("z^-1", "z")
    return [up] * abs(i) + ["b"] + [down] * abs(i)


def commutator_word(i: int, j: int) -> list[str]:
    """Freely reduced word for b_i b_j b_i b_j = [b_i, b_j]."""
    return free_reduce(b_word(i) + b_word(j) + b_word(i) + b_word(j))


class OmegaSet:
    """Omega(n) as a lazy set.

    Right multiplication by an admissible central element maps Omega(n) onto
    itself and commutes with right multiplication by anything, so every
    quantity built from right multiplications (boundaries, multiplier counts,
    the removal process) is constant on cosets of the central part. Methods
    named ``slice_*`` work on the representatives (L, {}, z); each stands for
    ``coset_size`` elements.
    """

    def __init__(self, G: Nil2Group, n: int):
        if n < 1:
            raise DegenerateInputError("n must be >= 1")
        self.G, self.n = G, n
        self.coset_size = 2 ** len(G.admissible_pairs(n))

    def __len__(self):
        return omega_cardinality(self.G, self.n)

    def __contains__(self, x):
        return isinstance(x, Nil2Element) and self.G.contains(x) and self.G.in_omega(x, self.n)

    def __iter__(self):
        return iter(omega_set(self.G, self.n))

    def materialize(self, budget: int = DEFAULT_BUDGET) -> set:
        return omega_set(self.G, self.n, budget)

    def boundary_ratio(self) -> Fraction:
        return omega_boundary_ratio(self.G, self.n)

    def slice_representatives(self) -> list[Nil2Element]:
        n = self.n
        return [Nil2Element(lin, (), z)
                for r in range(n + 2) for lin in itertools.combinations(range(n + 1), r)
                for z in range(n + 1)]

    def slice_rep(self, x: Nil2Element) -> Nil2Element:
        return Nil2Element(x.linear, (), x.z)


# ---------------------------------------------------------------------------
# basic commutators (counting only)
# ---------------------------------------------------------------------------

BASIC_BUDGET = 500_000


def _flatten(tree) -> tuple:
    return (tree,) if isinstance(tree, int) else _flatten(tree[0]) + _flatten(tree[1])


def _serialize(tree) -> str:
    return f"b{tree}" if isinstance(tree, int) else f"[{_serialize(tree[0])},{_serialize(tree[1])}]"


def commutator_key(tree) -> tuple:
    """Total order: weight first, then the flattened letter string, then the bracketing."""
    flat = _flatten(tree)
    return (len(flat), flat, _serialize(tree))


@dataclass(frozen=True, order=False)
class BasicCommutator:
    structure: object  # int leaf or (left, right)

    @property
    def weight(self) -> int:
        return len(_flatten(self.structure))

    @property
    def letters(self) -> tuple:
        return _flatten(self.structure)

    @property
    def order_key(self) -> tuple:
        return commutator_key(self.structure)

    def __lt__(self, other: "BasicCommutator") -> bool:
        return self.order_key < other.order_key

    def __str__(self):
        return _serialize(self.structure)


def is_basic(tree) -> bool:
    """Recursive basicness predicate for an arbitrary bracketing."""
    if isinstance(tree, int):
        return True
    u, v = tree
    if not (is_basic(u) and is_basic(v)):
        return False
    if commutator_key(u) <= commutator_key(v):
        return False
    return isinstance(u, int) or commutator_key(u[1]) <= commutator_key(v)


def witt_count(q: int, w: int) -> int:
    """Number of basic commutators of weight exactly w on q letters."""
    if w < 1 or q < 0:
        raise DegenerateInputError("need w >= 1 and q >= 0")

    def mobius(n):
        out, p = 1, 2
        while p * p <= n:
            if n % p == 0:
                n //= p
                if n % p == 0:
                    return 0
                out = -out
            p += 1
        return -out if n > 1 else out

    return sum(mobius(d) * q ** (w // d) for d in range(1, w + 1) if w % d == 0) // w


def enumerate_basic_commutators(letters: Iterable[int], max_weight: int,
                                budget: int = BASIC_BUDGET) -> list[BasicCommutator]:
    letters = sorted(set(int(i) for i in letters))
    if max_weight < 1:
        raise DegenerateInputError("max_weight must be >= 1")
    expected = sum(witt_count(len(letters), w) for w in range(1, max_weight + 1))
    if expected > budget:
        raise ResourceError(f"{expected} basic commutators exceed budget {budget}", layer=max_weight)
    by_weight: dict[int, list] = {1: list(letters)}
    for w in range(2, max_weight + 1):
        found = []
        for wu in range(w - 1, 0, -1):
            for u in by_weight[wu]:
                ku = commutator_key(u)
                tail = None if isinstance(u, int) else commutator_key(u[1])
                for v in by_weight[w - wu]:
                    kv = commutator_key(v)
                    if ku > kv and (tail is None or tail <= kv):
                        found.append((u, v))
        found.sort(key=commutator_key)
        by_weight[w] = found
    return [BasicCommutator(t) for w in range(1, max_weight + 1) for t in by_weight[w]]


def all_bracketings(letters: Iterable[int], w: int):
    """Every binary bracketing of every length-w string over ``letters`` (brute-force oracle)."""
    letters = sorted(set(letters))

    def trees(word):
        if len(word) == 1:
            yield word[0]
            return
        for cut in range(1, len(word)):
            for left in trees(word[:cut]):
                for right in trees(word[cut:]):
                    yield (left, right)

    for word in itertools.product(letters, repeat=w):
        yield from trees(word)
