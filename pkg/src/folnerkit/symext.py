"""Finitary permutational extensions Sym(Z^d) ⋊ Z^d.

Elements are (perm, z) with perm a finitely supported permutation of Z^d
and z a translation. The product is

    (p, z)(q, w) = (p o shift_z(q), z + w),   shift_z(q)(x) = q(x - z) + z,

so the shifted right factor acts first. Generators are the unit
translations ``t1..td`` (``t`` when d = 1) and the transpositions ``s_i``
swapping 0 and e_i (``s`` when d = 1).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .core import Group
from .errors import DegenerateInputError, ResourceError, StructuralError

Point = tuple


@dataclass(frozen=True, order=True)
class SymExtElement:
    perm: tuple  # ((point, image), ...) over moved points only, sorted
    z: tuple


def _add(a, b):
    return tuple(i + j for i, j in zip(a, b))


def _sub(a, b):
    return tuple(i - j for i, j in zip(a, b))


def make_perm(mapping: dict) -> tuple:
    m = {tuple(k): tuple(v) for k, v in mapping.items() if tuple(k) != tuple(v)}
    if sorted(m) != sorted(m.values()):
        raise StructuralError("mapping is not a permutation of its support")
    return tuple(sorted(m.items()))


def transposition(h1, h2, d: int = 1) -> SymExtElement:
    h1, h2 = _pt(h1, d), _pt(h2, d)
    if h1 == h2:
        raise DegenerateInputError("a transposition needs two distinct points")
    return SymExtElement(make_perm({h1: h2, h2: h1}), (0,) * d)


def _pt(h, d):
    h = (h,) if isinstance(h, int) else tuple(h)
    if len(h) != d:
        raise StructuralError(f"{h} is not a point of Z^{d}")
    return h


def symext_multiply(x: SymExtElement, y: SymExtElement, d: int) -> SymExtElement:
    p = dict(x.perm)
    out = dict(p)
    # shifted y first, then x
    for a, b in y.perm:
        a2, b2 = _add(a, x.z), _add(b, x.z)
        out[a2] = p.get(b2, b2)
    for a in list(out):
        if out[a] == a:
            del out[a]
    return SymExtElement(tuple(sorted(out.items())), _add(x.z, y.z))


def symext_inverse(x: SymExtElement) -> SymExtElement:
    # (p, z)^-1 = (shift_{-z}(p^-1), -z)
    back = tuple(-i for i in x.z)
    inv = tuple(sorted((_add(b, back), _add(a, back)) for a, b in x.perm))
    return SymExtElement(inv, back)


def l1(h) -> int:
    return sum(abs(i) for i in h)


class SymExtGroup(Group):
    family = "symext"

    def __init__(self, d: int = 1, generator_labels=None):
        if not isinstance(d, int) or d < 1:
            raise StructuralError(f"d must be an integer >= 1, got {d!r}")
        self.d = d
        super().__init__(generator_labels)

    @classmethod
    def from_params(cls, params, generator_labels=None):
        extra = set(params) - {"d"}
        if extra:
            raise StructuralError(f"unknown symext parameters {sorted(extra)}")
        return cls(params.get("d", 1), generator_labels)

    def params(self):
        return {"d": self.d}

    def _unit(self, i):
        return tuple(1 if j == i else 0 for j in range(self.d))

    def t_label(self, i):
        return "t" if self.d == 1 else f"t{i + 1}"

    def s_label(self, i):
        return "s" if self.d == 1 else f"s{i + 1}"

    def _declared_generators(self):
        gens = {}
        zero = (0,) * self.d
        for i in range(self.d):
            gens[self.t_label(i)] = SymExtElement((), self._unit(i))
        for i in range(self.d):
            gens[self.s_label(i)] = SymExtElement(make_perm({zero: self._unit(i), self._unit(i): zero}), zero)
        return gens

    @property
    def identity(self):
        return SymExtElement((), (0,) * self.d)

    def _multiply(self, x, y):
        return symext_multiply(x, y, self.d)

    def inverse(self, x):
        return symext_inverse(x)

    def contains(self, x):
        if not isinstance(x, SymExtElement) or len(x.z) != self.d:
            return False
        pts = [a for a, _ in x.perm]
        return (all(len(a) == self.d and a != b for a, b in x.perm)
                and sorted(pts) == sorted(b for _, b in x.perm) and list(pts) == sorted(set(pts)))

    # -- printing: cycles|z ------------------------------------------
    def _fmt_pt(self, p):
        return str(p[0]) if self.d == 1 else ";".join(map(str, p))

    def cycles(self, x):
        mapping = dict(x.perm)
        seen, out = set(), []
        for start in sorted(mapping):
            if start in seen:
                continue
            cyc, p = [], start
            while p not in seen:
                seen.add(p)
                cyc.append(p)
                p = mapping[p]
            out.append(tuple(cyc))
        return out

    def format_element(self, x):
        body = "".join("(" + " ".join(self._fmt_pt(p) for p in c) + ")" for c in self.cycles(x))
        return f"{body}|{self._fmt_pt(x.z)}"

    def parse_element(self, text):
        text = text.strip()
        if "|" not in text:
            raise StructuralError(f"not a symext element: {text!r}")
        body, z = text.rsplit("|", 1)
        mapping = {}
        for cyc in re.findall(r"\(([^()]*)\)", body):
            pts = [tuple(int(v) for v in tok.split(";")) for tok in cyc.split()]
            if any(len(p) != self.d for p in pts) or len(pts) < 2:
                raise StructuralError(f"bad cycle {cyc!r}")
            for a, b in zip(pts, pts[1:] + pts[:1]):
                if a in mapping:
                    raise StructuralError(f"point {a} repeated")
                mapping[a] = b
        zz = tuple(int(v) for v in z.split(";"))
        if len(zz) != self.d:
            raise StructuralError(f"bad translation {z!r}")
        x = SymExtElement(make_perm(mapping), zz)
        if self.format_element(x) != text:
            raise StructuralError(f"non-canonical element text {text!r}")
        return x

    # -- words ---------------------------------------------------------
    def _path_steps(self, h):
        """Unit steps (axis, sign) from 0 to h, coordinate by coordinate."""
        steps = []
        for i, v in enumerate(h):
            steps += [(i, 1 if v > 0 else -1)] * abs(v)
        return steps

    def _t(self, i, sign):
        lab = self.t_label(i)
        return lab if sign > 0 else lab + "^-1"

    def translation_word(self, h) -> list[str]:
        return [self._t(i, s) for i, s in self._path_steps(h)]

    def _move(self, a, b) -> list[str]:
        return self.translation_word(_sub(b, a))

    def _bubble(self, a, steps) -> list[str]:
        """Word for (a, a + sum(steps)) as tau_1 ... tau_l ... tau_1 along the unit steps.

        tau_k swaps p_{k-1} and p_k; it equals s_i conjugated so that the
        cursor sits at the smaller endpoint. Translations between anchors
        are emitted as net moves, so nothing is left to cancel.
        """
        anchors = []
        p = a
        for i, sign in steps:
            q = _add(p, tuple(sign if j == i else 0 for j in range(self.d)))
            anchors.append((min(p, q, key=lambda v: v[i]), i))
            p = q
        seq = anchors + anchors[-2::-1]
        word, cursor = [], (0,) * self.d
        for anchor, i in seq:
            word += self._move(cursor, anchor)
            word.append(self.s_label(i))
            cursor = anchor
        return word + self._move(cursor, (0,) * self.d)

    def transposition_word(self, h1, h2) -> list[str]:
        """Word for the transposition (h1, h2), shortest over both endpoints and all axis orders.

        For d = 1 and h1 < h2 its length is min(2|h1|, 2|h2 - 1|) + 4(h2 - h1) - 3;
        in particular (0, h) costs 4 l(h) - 3, which breadth-first search confirms is optimal
        for small h.
        """
        h1, h2 = _pt(h1, self.d), _pt(h2, self.d)
        if h1 == h2:
            raise DegenerateInputError("h1 == h2")
        best = None
        for a, b in ((h1, h2), (h2, h1)):
            diff = _sub(b, a)
            for order in itertools.permutations(range(self.d)):
                steps = [(i, 1 if diff[i] > 0 else -1) for i in order for _ in range(abs(diff[i]))]
                word = self._bubble(a, steps)
                if best is None or len(word) < len(best):
                    best = word
        return best

    def origin_transposition_word(self, h) -> list[str]:
        h = _pt(h, self.d)
        if not any(h):
            raise DegenerateInputError("(0, 0) is not a transposition")
        return self.transposition_word((0,) * self.d, h)


def transposition_word_length(h1, h2) -> int:
    """Length of :meth:`SymExtGroup.transposition_word` for d = 1, in closed form."""
    lo, hi = sorted((int(h1 if isinstance(h1, int) else h1[0]), int(h2 if isinstance(h2, int) else h2[0])))
    if lo == hi:
        raise DegenerateInputError("h1 == h2")
    return min(2 * abs(lo), 2 * abs(hi - 1)) + 4 * (hi - lo) - 3


def tset_transpositions(n: int, d: int = 1, budget: int = 200_000):
    """T_n: transpositions (h, h') with l(h), l(h') <= n, h != h', with their realizing words."""
    if n < 0:
        raise DegenerateInputError("n must be >= 0")
    pts = [p for p in itertools.product(range(-n, n + 1), repeat=d) if l1(p) <= n]
    count = len(pts) * (len(pts) - 1) // 2
    if count > budget:
        raise ResourceError(f"|T_{n}| = {count} exceeds budget {budget}", layer=n)
    G = SymExtGroup(d)
    out = []
    for a, b in itertools.combinations(sorted(pts), 2):
        out.append((transposition(a, b, d), G.transposition_word(a, b)))
    return out


# ---------------------------------------------------------------------------
# volume machinery on Sym(Y), Y = {0, ..., n-1}; permutations as tuples
# ---------------------------------------------------------------------------


def swap(sigma: tuple, j: int, k: int) -> tuple:
    """sigma o (j k)."""
    s = list(sigma)
    s[j], s[k] = s[k], s[j]
    return tuple(s)


def satisfactory_degree(V, n: int) -> int:
    """min over sigma in V of #{transpositions tau : sigma tau in V}."""
    V = set(V)
    return min(sum(swap(s, j, k) in V for j, k in itertools.combinations(range(n), 2)) for s in V)


def is_satisfactory(V, n: int, C) -> bool:
    """Every sigma has at least C * C(n, 2) transpositions tau with sigma tau in V."""
    import math

    V = set(V)
    if not V:
        return False
    need = math.ceil(C * n * (n - 1) / 2)
    return satisfactory_degree(V, n) >= need


def certified_count(V, n: int) -> int:
    """Recursive slice lower bound for |V|, V a set of permutations of {0..n-1}.

    Pick a value y and a v in V; slice V by the position holding y. The
    neighbours v o (j k) with v(j) = y sit in pairwise different slices, so
    the slices they hit (plus v's own) are disjoint non-empty subsets of V.
    Summing bounds for those slices recursively gives a bound <= |V| that is
    exact for V = Sym(Y).
    """
    V = frozenset(V)
    if any(len(s) != n or sorted(s) != list(range(n)) for s in V):
        raise StructuralError("V must consist of permutations of range(n)")
    return _certified(V, frozenset(range(n)))


def _certified(V: frozenset, free_values: frozenset) -> int:
    if not V:
        return 0
    if len(free_values) <= 1:
        return 1
    best = None
    for y in sorted(free_values):
        for v in sorted(V):
            j = v.index(y)
            ks = [k for k in range(len(v)) if k != j and swap(v, j, k) in V]
            if best is None or len(ks) > len(best[2]):
                best = (y, v, ks, j)
        if best is not None and len(best[2]) == len(free_values) - 1:
            break
    y, v, ks, j = best
    rest = free_values - {y}
    total = 0
    for k in [j] + ks:
        slice_k = frozenset(s for s in V if s[k] == y)
        total += _certified(slice_k, rest)
    return total


def sym_satisfactory_volume_bound(n_points: int, m: int) -> int:
    """max(1, floor(x^x)) with x = m / (2 n), in exact integer arithmetic."""
    if n_points < 1 or m < 1:
        raise DegenerateInputError("need n_points >= 1 and m >= 1")
    p, q = m, 2 * n_points
    if p <= q:
        return 1
    # largest N with N^q * q^p <= p^p
    target = p ** p
    qp = q ** p
    lo, hi = 1, 2
    while hi ** q * qp <= target:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid ** q * qp <= target:
            lo = mid
        else:
            hi = mid
    return lo
