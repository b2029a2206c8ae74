"""Lamplighter groups Z^d wr Z/pZ.

An element is a finitely supported lamp configuration on Z^d with values in
Z/pZ together with a cursor position. The generators are the unit shifts
``t`` (``t1..td`` when d > 1) and the lamp ``b`` at the origin.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .core import Group
from .errors import StructuralError, UnsupportedError


@dataclass(frozen=True, order=True)
class LampElement:
    config: tuple  # ((point, value), ...) sorted by point, values in 1..p-1
    pos: tuple

    @property
    def support(self):
        return tuple(pt for pt, _ in self.config)


def _add(a, b):
    return tuple(i + j for i, j in zip(a, b))


def _neg(a):
    return tuple(-i for i in a)


def make_lamp(config: dict, pos, p: int = 2, d: int = 1) -> LampElement:
    """Build a canonical element from a {point: value} dict (ints allowed when d = 1)."""
    if isinstance(pos, int):
        pos = (pos,)
    items = {}
    for pt, v in config.items():
        pt = (pt,) if isinstance(pt, int) else tuple(pt)
        if len(pt) != d:
            raise StructuralError(f"point {pt} is not in Z^{d}")
        v %= p
        if v:
            items[pt] = v
    if len(pos) != d:
        raise StructuralError(f"position {pos} is not in Z^{d}")
    return LampElement(tuple(sorted(items.items())), tuple(pos))


def wreath_multiply(x: LampElement, y: LampElement, p: int, d: int) -> LampElement:
    if p < 2 or d < 1:
        raise StructuralError("need p >= 2 and d >= 1")
    if not y.config:
        return LampElement(x.config, _add(x.pos, y.pos))
    acc = dict(x.config)
    for pt, v in y.config:
        q = _add(pt, x.pos)
        s = (acc.get(q, 0) + v) % p
        if s:
            acc[q] = s
        else:
            acc.pop(q, None)
    return LampElement(tuple(sorted(acc.items())), _add(x.pos, y.pos))


def wreath_inverse(x: LampElement, p: int) -> LampElement:
    back = _neg(x.pos)
    cfg = tuple(sorted((_add(pt, back), (-v) % p) for pt, v in x.config))
    return LampElement(cfg, back)


def lamp_length_exact(x: LampElement, p: int = 2, d: int = 1) -> int:
    """Word length in Z wr Z/2Z with respect to {t, t^-1, b}.

    The cursor starts at 0, must visit every lit lamp (one ``b`` each) and
    stop at ``pos``. With L, R the extremes of support and {0, pos}, the
    shortest sweep costs 2(R - L) - |pos| moves of the cursor, so

        length = #support + 2 (R - L) - |pos|.
    """
    if p != 2 or d != 1:
        raise UnsupportedError("closed-form length is only available for p = 2, d = 1")
    z = x.pos[0]
    pts = [pt[0] for pt, _ in x.config]
    lo = min(pts + [0, z])
    hi = max(pts + [0, z])
    return len(pts) + 2 * (hi - lo) - abs(z)


class WreathGroup(Group):
    family = "wreath"

    def __init__(self, p: int = 2, d: int = 1, generator_labels=None):
        if not isinstance(p, int) or p < 2:
            raise StructuralError(f"lamp group order p must be an integer >= 2, got {p!r}")
        if not isinstance(d, int) or d < 1:
            raise StructuralError(f"base rank d must be an integer >= 1, got {d!r}")
        self.p = p
        self.d = d
        self._e = LampElement((), (0,) * d)
        super().__init__(generator_labels)

    @classmethod
    def from_params(cls, params, generator_labels=None):
        extra = set(params) - {"p", "d"}
        if extra:
            raise StructuralError(f"unknown wreath parameters {sorted(extra)}")
        return cls(params.get("p", 2), params.get("d", 1), generator_labels)

    def params(self):
        return {"p": self.p, "d": self.d}

    def _declared_generators(self):
        gens = {}
        for i in range(self.d):
            unit = tuple(1 if j == i else 0 for j in range(self.d))
            gens["t" if self.d == 1 else f"t{i + 1}"] = LampElement((), unit)
        gens["b"] = LampElement((((0,) * self.d, 1),), (0,) * self.d)
        return gens

    @property
    def identity(self):
        return self._e

    def _multiply(self, x, y):
        return wreath_multiply(x, y, self.p, self.d)

    def inverse(self, x):
        return wreath_inverse(x, self.p)

    def contains(self, x):
        if not isinstance(x, LampElement) or len(x.pos) != self.d:
            return False
        return all(len(pt) == self.d and 0 < v < self.p for pt, v in x.config)

    def exact_length(self, x):
        labels = set(self.generator_labels)
        if self.d == 1 and labels == {"t"}:
            return abs(x.pos[0]) if not x.config else None
        if self.p == 2 and self.d == 1 and labels == {"t", "b"}:
            return lamp_length_exact(x)
        return None

    # -- printing ------------------------------------------------------
    def _fmt_pt(self, pt):
        return str(pt[0]) if self.d == 1 else ";".join(map(str, pt))

    def _parse_pt(self, text):
        pt = tuple(int(s) for s in text.split(";"))
        if len(pt) != self.d:
            raise StructuralError(f"point {text!r} is not in Z^{self.d}")
        return pt

    def format_element(self, x):
        body = ",".join(f"{self._fmt_pt(pt)}:{v}" for pt, v in x.config)
        return f"({body}|{self._fmt_pt(x.pos)})"

    def parse_element(self, text):
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")") and "|" in text):
            raise StructuralError(f"not a lamplighter element: {text!r}")
        body, pos = text[1:-1].rsplit("|", 1)
        cfg = {}
        for item in filter(None, body.split(",")):
            pt, v = item.split(":")
            cfg[self._parse_pt(pt)] = int(v)
        x = make_lamp(cfg, self._parse_pt(pos), self.p, self.d)
        if self.format_element(x) != text.replace(" ", ""):
            raise StructuralError(f"non-canonical element text {text!r}")
        return x

    def to_json(self, x) -> str:
        return json.dumps({"config": [[list(pt), v] for pt, v in x.config], "pos": list(x.pos)})

    def from_json(self, text) -> LampElement:
        data = json.loads(text)
        return make_lamp({tuple(pt): v for pt, v in data["config"]}, tuple(data["pos"]), self.p, self.d)

    # -- convenience ---------------------------------------------------
    def lamp(self, point, value=1):
        point = (point,) if isinstance(point, int) else tuple(point)
        return make_lamp({point: value}, (0,) * self.d, self.p, self.d)

    def shift(self, pos):
        pos = (pos,) if isinstance(pos, int) else tuple(pos)
        return LampElement((), pos)
