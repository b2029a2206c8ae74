"""Grigorchuk groups G_omega acting on the rooted binary tree.

Vertices are binary strings; the action is a right action, so a word
x1 x2 ... xn sends v to (...((v x1) x2)...) xn. The letter ``a`` swaps the
two subtrees of the root. At level i the letters b, c, d have first
sections (a, a, 1), (a, 1, a) or (1, a, a) according to omega_i = 0, 1, 2,
and second sections equal to themselves one level down. Each of b, c, d is
therefore trivial in its first coordinate at exactly one value of omega_i,
recorded in ``_NULL``.

For omega = (012)^infinity the shifted sequence is omega + 1 (mod 3), so
words one level down are renamed back to level 0; this gives the familiar
b = (a, c), c = (a, d), d = (1, b).
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx
import numpy as np

from .core import Group
from .errors import DegenerateInputError, ResourceError, StructuralError, UnsupportedError

_NULL = {"d": 0, "c": 1, "b": 2}
_BY_NULL = {v: k for k, v in _NULL.items()}
_BCD = frozenset("bcd")
_KLEIN = {frozenset("bc"): "d", frozenset("bd"): "c", frozenset("cd"): "b"}
_SIGMA = {"a": "aca", "b": "d", "c": "b", "d": "c"}


# ---------------------------------------------------------------------------
# omega
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OmegaSeq:
    preperiod: str = ""
    period: str = "012"

    def __post_init__(self):
        pre, per = self.preperiod, self.period
        if not per:
            raise StructuralError("omega needs a non-empty period")
        if set(pre + per) - set("012"):
            raise StructuralError(f"omega letters must be 0, 1, 2: {pre!r}|{per!r}")
        # minimal period
        for p in range(1, len(per) + 1):
            if len(per) % p == 0 and per[:p] * (len(per) // p) == per:
                per = per[:p]
                break
        # minimal preperiod: absorb trailing preperiod letters into a rotated period
        while pre and pre[-1] == per[-1]:
            pre, per = pre[:-1], per[-1] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def parse(cls, text: str):
        if "|" not in text:
            raise StructuralError(f"omega must look like 'pre|period', got {text!r}")
        pre, per = text.split("|", 1)
        return cls(pre.strip(), per.strip())

    def __str__(self):
        return f"{self.preperiod}|{self.period}"

    def __getitem__(self, i: int) -> int:
        if i < len(self.preperiod):
            return int(self.preperiod[i])
        return int(self.period[(i - len(self.preperiod)) % len(self.period)])

    def normalize_offset(self, j: int) -> int:
        P, p = len(self.preperiod), len(self.period)
        return j if j < P else P + (j - P) % p

    @property
    def eventually_constant(self) -> bool:
        return len(set(self.period)) == 1

    def window(self, j: int, length: int) -> tuple:
        return tuple(self[j + i] for i in range(length))

    @lru_cache(maxsize=None)
    def relabeling(self, j: int):
        """(j0, perm) with shift^j omega = perm o shift^j0 omega and j0 minimal, perm a dict on {0,1,2}."""
        j = self.normalize_offset(j)
        span = len(self.preperiod) + len(self.period)
        target = self.window(j, span)
        for j0 in range(j + 1):
            src = self.window(j0, span)
            perm = {}
            if all(perm.setdefault(s, t) == t for s, t in zip(src, target)) \
                    and len(set(perm.values())) == len(perm):
                free = iter(sorted({0, 1, 2} - set(perm.values())))
                for v in (0, 1, 2):
                    if v not in perm:
                        perm[v] = next(free)
                return j0, perm
        return j, {0: 0, 1: 1, 2: 2}  # unreachable: j0 = j always matches

    def is_012(self) -> bool:
        return self.preperiod == "" and self.period == "012"


def _omega(omega) -> OmegaSeq:
    if isinstance(omega, OmegaSeq):
        return omega
    if isinstance(omega, str):
        return OmegaSeq.parse(omega)
    raise StructuralError(f"cannot read omega from {omega!r}")


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class GrigWord:
    letters: str = ""
    offset: int = 0

    def __post_init__(self):
        if set(self.letters) - set("abcd"):
            raise StructuralError(f"letters must be in abcd: {self.letters!r}")
        if self.offset < 0:
            raise StructuralError("offset must be >= 0")

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return self.letters


def reduce_letters(letters: str) -> str:
    """Cancel aa, xx and merge adjacent pairs of b, c, d (they form a Klein four-group)."""
    out: list[str] = []
    for ch in letters:
        while True:
            if not out:
                out.append(ch)
                break
            top = out[-1]
            if top == ch:
                out.pop()
                break
            if top in _BCD and ch in _BCD:
                out.pop()
                ch = _KLEIN[frozenset((top, ch))]
                continue
            out.append(ch)
            break
    return "".join(out)


def normalize(w: GrigWord, omega) -> GrigWord:
    """Reduce, and rename letters to the smallest offset carrying the same letter pattern."""
    om = _omega(omega)
    letters = reduce_letters(w.letters)
    j0, perm = om.relabeling(w.offset)
    if any(ch in _BCD for ch in letters):
        inv = {v: k for k, v in perm.items()}
        letters = "".join(_BY_NULL[inv[_NULL[ch]]] if ch in _BCD else ch for ch in letters)
    return GrigWord(letters, j0)


def sections(w: GrigWord, omega) -> tuple[GrigWord, GrigWord, bool]:
    """(w|0, w|1, swaps): w acts as (w|0, w|1) followed by the root swap when ``swaps``."""
    om = _omega(omega)
    level = om[w.offset]
    parts = ([], [])
    pos = [0, 1]  # current subtree for a point starting in subtree 0 / 1
    for ch in w.letters:
        if ch == "a":
            pos = [p ^ 1 for p in pos]
            continue
        for start in (0, 1):
            if pos[start] == 0:
                if level != _NULL[ch]:
                    parts[start].append("a")
            else:
                parts[start].append(ch)
    swaps = w.letters.count("a") % 2 == 1
    nxt = w.offset + 1
    w0 = normalize(GrigWord("".join(parts[0]), nxt), om)
    w1 = normalize(GrigWord("".join(parts[1]), nxt), om)
    return w0, w1, swaps


def _letter_trivial(ch: str, offset: int, om: OmegaSeq) -> bool:
    if ch == "a":
        return False
    # nontrivial iff some level at or below offset has a nontrivial first coordinate
    span = len(om.preperiod) + len(om.period)
    return all(om[offset + i] == _NULL[ch] for i in range(span + 1))


def is_trivial(w: GrigWord, omega) -> bool:
    """Word problem in G_omega by contraction (sections are about half as long)."""
    om = _omega(omega)
    return _is_trivial(normalize(w, om), om)


@lru_cache(maxsize=1 << 18)
def _is_trivial(w: GrigWord, om: OmegaSeq) -> bool:
    n = len(w.letters)
    if n == 0:
        return True
    if w.letters.count("a") % 2:
        return False
    if n == 1:
        return _letter_trivial(w.letters, w.offset, om)
    w0, w1, _ = sections(w, om)
    return _is_trivial(w0, om) and _is_trivial(w1, om)


def inverse_word(w: GrigWord) -> GrigWord:
    return GrigWord(w.letters[::-1], w.offset)


def concat(u: GrigWord, v: GrigWord, omega) -> GrigWord:
    if u.offset != v.offset:
        raise StructuralError("words live at different offsets")
    return normalize(GrigWord(u.letters + v.letters, u.offset), omega)


def equal(u: GrigWord, v: GrigWord, omega) -> bool:
    return is_trivial(concat(u, inverse_word(v), omega), omega)


# ---------------------------------------------------------------------------
# tree action
# ---------------------------------------------------------------------------


def act_letter(ch: str, v: str, offset: int, om: OmegaSeq) -> str:
    if not v:
        return v
    if ch == "a":
        return ("1" if v[0] == "0" else "0") + v[1:]
    out = list(v)
    for i, bit in enumerate(v):
        if bit == "0":
            if i + 1 < len(v) and om[offset + i] != _NULL[ch]:
                out[i + 1] = "1" if v[i + 1] == "0" else "0"
            break
    return "".join(out)


def act(w: GrigWord, v: str, omega) -> str:
    """Image of vertex v under w, letter by letter."""
    om = _omega(omega)
    for ch in w.letters:
        v = act_letter(ch, v, w.offset, om)
    return v


def act_by_sections(w: GrigWord, v: str, omega) -> str:
    """Image of v computed through the wreath recursion (independent of :func:`act`)."""
    om = _omega(omega)
    out = []
    while v:
        w0, w1, swaps = sections(w, om)
        head = int(v[0])
        out.append(str(head ^ swaps))
        w, v = (w0 if head == 0 else w1), v[1:]
    return "".join(out)


def section_at(w: GrigWord, v: str, omega) -> tuple[GrigWord, str]:
    """(w|_v, v·w)."""
    om = _omega(omega)
    image = []
    for bit in v:
        w0, w1, swaps = sections(w, om)
        image.append(str(int(bit) ^ swaps))
        w = w0 if bit == "0" else w1
    return w, "".join(image)


def level_permutations(depth: int, omega, offset: int = 0) -> dict[str, np.ndarray]:
    """Permutation arrays of a, b, c, d on level ``depth`` (vertex index = int(v, 2))."""
    om = _omega(omega)
    size = 1 << depth
    verts = [format(i, f"0{depth}b") if depth else "" for i in range(size)]
    return {ch: np.array([int(act_letter(ch, v, offset, om) or "0", 2) for v in verts])
            for ch in "abcd"}


def word_permutation(w: GrigWord, depth: int, omega) -> np.ndarray:
    perms = level_permutations(depth, omega, w.offset)
    out = np.arange(1 << depth)
    for ch in w.letters:
        out = perms[ch][out]
    return out


# ---------------------------------------------------------------------------
# canonical elements and the group
# ---------------------------------------------------------------------------


def canonical_form(w: GrigWord, omega) -> str:
    """Portrait of w down to the nucleus {e, a, b, c, d}; equal elements give equal strings."""
    om = _omega(omega)
    return _canon(normalize(w, om), om)


@lru_cache(maxsize=1 << 16)
def _canon(w: GrigWord, om: OmegaSeq) -> str:
    for x in "eabcd":
        probe = GrigWord(w.letters + ("" if x == "e" else x), w.offset)
        if _is_trivial(normalize(probe, om), om):
            return x if x in "ea" else f"{x}@{w.offset}"
    w0, w1, swaps = sections(w, om)
    return f"({int(swaps)},{_canon(w0, om)},{_canon(w1, om)})"


@dataclass(frozen=True)
class GrigElement:
    canon: str
    word: GrigWord

    def __eq__(self, other):
        return isinstance(other, GrigElement) and self.canon == other.canon

    def __hash__(self):
        return hash(self.canon)

    def __lt__(self, other):
        return self.canon < other.canon


class GrigorchukGroup(Group):
    family = "grigorchuk"

    def __init__(self, omega="|012", generator_labels=None):
        self.omega = _omega(omega)
        super().__init__(generator_labels)

    @classmethod
    def from_params(cls, params, generator_labels=None):
        extra = set(params) - {"omega"}
        if extra:
            raise StructuralError(f"unknown grigorchuk parameters {sorted(extra)}")
        return cls(params.get("omega", "|012"), generator_labels)

    def params(self):
        return {"omega": str(self.omega)}

    def element(self, letters: str) -> GrigElement:
        w = normalize(GrigWord(letters, 0), self.omega)
        return GrigElement(canonical_form(w, self.omega), w)

    def _declared_generators(self):
        return {ch: self.element(ch) for ch in "abcd"}

    @property
    def identity(self):
        return self.element("")

    def _multiply(self, x, y):
        return self.element(x.word.letters + y.word.letters)

    def inverse(self, x):
        return self.element(x.word.letters[::-1])

    def contains(self, x):
        return isinstance(x, GrigElement) and x.word.offset == 0

    def format_element(self, x):
        return x.word.letters or "e"

    def parse_element(self, text):
        text = text.strip()
        if text == "e":
            text = ""
        if set(text) - set("abcd"):
            raise StructuralError(f"not a word over abcd: {text!r}")
        return self.element(text)


# ---------------------------------------------------------------------------
# substitution, Schreier graphs, rigid-stabilizer witnesses
# ---------------------------------------------------------------------------


def sigma(w: GrigWord | str) -> GrigWord:
    """a -> aca, b -> d, c -> b, d -> c, then reduction."""
    letters = w.letters if isinstance(w, GrigWord) else w
    return GrigWord(reduce_letters("".join(_SIGMA[ch] for ch in letters)), 0)


def sigma_power(w: GrigWord | str, k: int) -> GrigWord:
    out = w if isinstance(w, GrigWord) else GrigWord(w, 0)
    for _ in range(k):
        out = sigma(out)
    return out


@dataclass(frozen=True)
class SchreierReport:
    k: int
    graph: nx.Graph
    connected: bool
    diameter: int


def schreier_graph(k: int, omega="|012") -> SchreierReport:
    if k < 0:
        raise DegenerateInputError("k must be >= 0")
    if k > 14:
        raise ResourceError(f"level {k} exceeds the supported depth 14", layer=k)
    om = _omega(omega)
    perms = level_permutations(k, om)
    g = nx.Graph()
    g.add_nodes_from(format(i, f"0{k}b") if k else "" for i in range(1 << k))
    for ch, p in perms.items():
        for i, j in enumerate(p):
            if i != j:
                u, v = (format(i, f"0{k}b"), format(int(j), f"0{k}b"))
                if g.has_edge(u, v):
                    g[u][v]["labels"] = "".join(sorted(set(g[u][v]["labels"] + ch)))
                else:
                    g.add_edge(u, v, labels=ch)
    connected = nx.is_connected(g)
    diameter = nx.diameter(g, usebounds=True) if connected and k else 0
    return SchreierReport(k, g, connected, diameter)


def rho(u: str, omega="|012") -> GrigWord:
    """A shortest word moving u to 1^k on the Schreier graph."""
    om = _omega(omega)
    k = len(u)
    target = "1" * k
    prev = {u: None}
    queue = deque([u])
    while queue:
        v = queue.popleft()
        if v == target:
            break
        for ch in "abcd":
            nxt = act_letter(ch, v, 0, om)
            if nxt not in prev:
                prev[nxt] = (v, ch)
                queue.append(nxt)
    if target not in prev:
        raise StructuralError(f"Schreier graph at level {k} is disconnected")
    word = []
    v = target
    while prev[v] is not None:
        v, ch = prev[v]
        word.append(ch)
    return GrigWord("".join(reversed(word)), 0)


def rist_witness(u: str, omega="|012") -> GrigWord:
    """g_u = rho_u g_{1^k} rho_u^{-1}, where g_{1^k} = sigma^k(abab); lies in Rist(u)."""
    om = _omega(omega)
    if not om.is_012():
        raise UnsupportedError("substitution witnesses are implemented for omega = (012)^infinity only")
    if set(u) - set("01"):
        raise StructuralError(f"not a vertex: {u!r}")
    k = len(u)
    g = sigma_power("abab", k)
    r = rho(u, om)
    return GrigWord(r.letters + g.letters + r.letters[::-1], 0)


@dataclass(frozen=True)
class RistCheck:
    vertex: str
    length: int
    fixes_level: bool
    trivial_elsewhere: bool
    nontrivial: bool

    @property
    def ok(self):
        return self.fixes_level and self.trivial_elsewhere and self.nontrivial


def verify_rist(w: GrigWord, u: str, omega="|012") -> RistCheck:
    """Exact check that w fixes level |u|, has trivial sections off u, and is nontrivial."""
    om = _omega(omega)
    k = len(u)
    fixes, elsewhere = True, True
    for v in ("".join(bits) for bits in itertools.product("01", repeat=k)):
        sec, image = section_at(w, v, om)
        if image != v:
            fixes = False
        if v != u and not is_trivial(sec, om):
            elsewhere = False
    return RistCheck(u, len(w.letters), fixes, elsewhere, not is_trivial(w, om))


def support_check_by_action(w: GrigWord, u: str, extra_depth: int = 6, omega="|012") -> bool:
    """Depth-(|u| + extra_depth) action check: w moves nothing outside the subtree of u."""
    depth = len(u) + extra_depth
    perm = word_permutation(w, depth, omega)
    idx = np.arange(1 << depth)
    below = (idx >> extra_depth) == (int(u, 2) if u else 0)
    if not np.all(perm[~below] == idx[~below]):
        return False
    return bool(np.all(perm[below] >> extra_depth == idx[below] >> extra_depth))


def level_witnesses(k: int, omega="|012") -> dict[str, GrigWord]:
    return {"".join(bits): rist_witness("".join(bits), omega)
            for bits in itertools.product("01", repeat=k)}


def commute(u: GrigWord, v: GrigWord, omega="|012") -> bool:
    letters = u.letters + v.letters + u.letters[::-1] + v.letters[::-1]
    return is_trivial(GrigWord(letters, u.offset), omega)


def write_schreier_dot(report: SchreierReport, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"graph schreier_{report.k} {{\n")
        for u, v, data in sorted(report.graph.edges(data=True)):
            fh.write(f'  "{u}" -- "{v}" [label="{data["labels"]}"];\n')
        fh.write("}\n")


def write_schreier_csv(report: SchreierReport, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["source", "target", "labels"])
        for u, v, data in sorted(report.graph.edges(data=True)):
            wr.writerow([u, v, data["labels"]])
