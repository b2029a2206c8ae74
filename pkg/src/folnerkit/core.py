"""Uniform interface for the finitely generated groups in this package.

Every family (wreath products, step-2 nilpotent quotients, Grigorchuk
groups, finitary symmetric extensions) subclasses :class:`Group` and
supplies canonical, hashable, totally ordered elements. Everything else in
the package (balls, boundaries, walks, certificates) only talks to this
interface.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .errors import DegenerateInputError, ResourceError, StructuralError

DEFAULT_BUDGET = 5_000_000

INVERSE_SUFFIX = "^-1"


class Group:
    """Base class for a group with a finite declared generating set.

    Subclasses implement ``_declared_generators``, ``identity``,
    ``_multiply``, ``inverse``, ``contains``, ``format_element`` and
    ``parse_element``. ``generator_labels`` may select a subset of the
    declared generators; the group then means the subgroup they generate
    with its own word metric (e.g. ``["t"]`` inside a lamplighter is a copy
    of the integers).
    """

    family = "abstract"

    def __init__(self, generator_labels: Sequence[str] | None = None):
        declared = self._declared_generators()
        if generator_labels is None:
            generator_labels = list(declared)
        generator_labels = list(generator_labels)
        if not generator_labels:
            raise StructuralError("generator_labels must be non-empty")
        unknown = [g for g in generator_labels if g not in declared]
        if unknown:
            raise StructuralError(
                f"unknown generator labels {unknown} for family {self.family}; "
                f"declared: {list(declared)}"
            )
        self.generator_labels = tuple(generator_labels)
        self._generators = {lab: declared[lab] for lab in self.generator_labels}
        self._symmetric = self._symmetrize()

    # -- family hooks -------------------------------------------------
    def _declared_generators(self) -> dict[str, Any]:
        raise NotImplementedError

    @property
    def identity(self):
        raise NotImplementedError

    def _multiply(self, x, y):
        raise NotImplementedError

    def inverse(self, x):
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def format_element(self, x) -> str:
        raise NotImplementedError

    def parse_element(self, text: str):
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def exact_length(self, x) -> int | None:
        """Closed-form word length when the family has one, else ``None``."""
        return None

    # -- shared machinery ---------------------------------------------
    def _symmetrize(self):
        out = []
        seen = set()
        for lab, g in self._generators.items():
            for label, elt in ((lab, g), (lab + INVERSE_SUFFIX, self.inverse(g))):
                if elt in seen or elt == self.identity:
                    continue
                seen.add(elt)
                out.append((label, elt))
        return tuple(out)

    @property
    def generators(self) -> dict[str, Any]:
        return dict(self._generators)

    @property
    def symmetric_generators(self) -> tuple[tuple[str, Any], ...]:
        """Declared generators plus formal inverses, involutions deduplicated."""
        return self._symmetric

    def multiply(self, x, y):
        if not self.contains(x) or not self.contains(y):
            raise StructuralError(
                f"family mismatch: {type(x).__name__}/{type(y).__name__} "
                f"not elements of {self.family}"
            )
        return self._multiply(x, y)

    def generator(self, label: str):
        if label.endswith(INVERSE_SUFFIX):
            return self.inverse(self._lookup(label[: -len(INVERSE_SUFFIX)]))
        return self._lookup(label)

    def _lookup(self, label):
        declared = self._declared_generators()
        if label not in declared:
            raise StructuralError(f"unknown generator {label!r}")
        return declared[label]

    def evaluate(self, word: Iterable[str]):
        """Multiply out a word given as a sequence of generator labels."""
        x = self.identity
        for label in word:
            x = self._multiply(x, self.generator(label))
        return x

    def commute(self, x, y) -> bool:
        return self._multiply(x, y) == self._multiply(y, x)

    @property
    def spec(self) -> "GroupSpec":
        return GroupSpec(self.family, self.params(), self.generator_labels)

    def __repr__(self):
        return f"{type(self).__name__}({self.params()}, gens={list(self.generator_labels)})"


# ---------------------------------------------------------------------------
# GroupSpec: the serializable description of a group
# ---------------------------------------------------------------------------

FAMILIES = ("wreath", "nil2", "grigorchuk", "symext")


@dataclass(frozen=True)
class GroupSpec:
    family: str
    params: Mapping[str, Any] = field(default_factory=dict)
    generator_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise StructuralError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.generator_labels is not None:
            object.__setattr__(self, "generator_labels", tuple(self.generator_labels))
            if not self.generator_labels:
                raise StructuralError("generator_labels must be non-empty")

    def build(self) -> Group:
        if self.family == "wreath":
            from .wreath import WreathGroup as cls
        elif self.family == "nil2":
            from .nilpotent2 import Nil2Group as cls
        elif self.family == "grigorchuk":
            from .grigorchuk import GrigorchukGroup as cls
        else:
            from .symext import SymExtGroup as cls
        return cls.from_params(dict(self.params), self.generator_labels)

    def to_json(self) -> str:
        payload = {"family": self.family, "params": dict(self.params)}
        if self.generator_labels is not None:
            payload["generator_labels"] = list(self.generator_labels)
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str | Mapping) -> "GroupSpec":
        data = json.loads(text) if isinstance(text, str) else dict(text)
        if "family" not in data:
            raise StructuralError("GroupSpec JSON needs a 'family' field")
        labels = data.get("generator_labels")
        return cls(data["family"], data.get("params", {}), tuple(labels) if labels else None)


def multiply(G: Group, x, y):
    return G.multiply(x, y)


# ---------------------------------------------------------------------------
# Balls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ball:
    center: Any
    radius: int
    members: Mapping[Any, int]
    layer_sizes: tuple[int, ...]

    def __len__(self):
        return len(self.members)

    def __contains__(self, x):
        return x in self.members

    def layer(self, i: int) -> list:
        return sorted(x for x, l in self.members.items() if l == i)


def _bfs(G: Group, r: int, budget: int, target=None):
    identity = G.identity
    members = {identity: 0}
    frontier = [identity]
    sizes = [1]
    gens = [g for _, g in G.symmetric_generators]
    for layer in range(1, r + 1):
        if target is not None and target in members:
            break
        nxt = []
        for x in frontier:
            for s in gens:
                y = G._multiply(x, s)
                if y not in members:
                    members[y] = layer
                    nxt.append(y)
                    if len(members) > budget:
                        raise ResourceError(
                            f"ball budget {budget} exceeded while building layer {layer} "
                            f"(radius {r} requested)",
                            layer=layer,
                        )
        if not nxt:
            break
        sizes.append(len(nxt))
        frontier = nxt
    return members, sizes


def ball(G: Group, r: int, budget: int = DEFAULT_BUDGET) -> Ball:
    """All elements of word length at most ``r``, with exact lengths (BFS layers)."""
    if r < 0:
        raise DegenerateInputError("radius must be >= 0")
    members, sizes = _bfs(G, r, budget)
    sizes = sizes + [0] * (r + 1 - len(sizes))
    return Ball(G.identity, r, members, tuple(sizes))


def word_length(G: Group, x, r_max: int, budget: int = DEFAULT_BUDGET) -> int | None:
    """Exact length of ``x`` if it is at most ``r_max``, else ``None`` (unknown)."""
    if r_max < 0:
        raise DegenerateInputError("r_max must be >= 0")
    if not G.contains(x):
        raise StructuralError("element does not belong to this group")
    exact = G.exact_length(x)
    if exact is not None:
        return exact if exact <= r_max else None
    members, _ = _bfs(G, r_max, budget, target=x)
    return members.get(x)


# ---------------------------------------------------------------------------
# Boundaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryReport:
    set_size: int
    boundary_size: int
    ratio: Fraction


def boundary_set(G: Group, V) -> set:
    """Inner boundary: elements of V with a symmetric-generator neighbour outside V."""
    V = V if isinstance(V, (set, frozenset, dict)) else set(V)
    gens = [g for _, g in G.symmetric_generators]
    return {v for v in V if any(G._multiply(v, s) not in V for s in gens)}


def inner_boundary(G: Group, V) -> BoundaryReport:
    V = V if isinstance(V, (set, frozenset, dict)) else set(V)
    if not V:
        raise DegenerateInputError("boundary of the empty set is undefined")
    for v in V:
        if not G.contains(v):
            raise StructuralError(f"{v!r} is not an element of {G!r}")
    b = len(boundary_set(G, V))
    return BoundaryReport(len(V), b, Fraction(b, len(V)))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def write_ball_csv(G: Group, B: Ball, path) -> None:
    rows = sorted(B.members.items(), key=lambda kv: (kv[1], G.format_element(kv[0])))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["element_repr", "length"])
        for x, l in rows:
            w.writerow([G.format_element(x), l])
