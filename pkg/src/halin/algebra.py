"""Boundary-tuple algebra and palettes.

The tuple-level rules (:func:`composable`, :func:`yields`, :func:`unary_extend`,
:func:`is_completable`) are written out literally.  Palettes are stored as
boolean arrays ``P[head, x, y]`` where ``head`` indexes the (r, r*) pair and
``x``/``y`` index the (x, x*) and (y, y*) pairs.  Composition only couples
heads with heads and y-tails with x-tails, so a palette product reduces to
small matrix products; the coupling tables are derived once per mode by
running the literal tuple rules on representative tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .model import COLORS, BoundaryTuple, Mode, check_tuple, encode_tuple

ALL = frozenset(COLORS)


# ---------------------------------------------------------------------------
# Tuple-level rules
# ---------------------------------------------------------------------------

def is_completable(mode: Mode, t: Sequence) -> bool:
    """Can the deleted peripheral vertex be put back under this boundary coloring?"""
    mode = Mode.parse(mode)
    a, b, c, d, e, f = check_tuple(mode, t)
    if len({a, c, e}) != 3:
        return False
    if mode.is_avd:
        (g,) = ALL - {a, c, e}
        return {g} != d and {g} != f and {g} != b
    return len({a, b, c, d, e, f}) == 3


def composable(mode: Mode, s1: Sequence, s2: Sequence) -> bool:
    mode = Mode.parse(mode)
    a1, b1, c1, d1, e1, f1 = check_tuple(mode, s1)
    a2, b2, c2, d2, e2, f2 = check_tuple(mode, s2)
    if mode.is_avd:
        return e1 == c2 and f1 != d2 and a1 != a2
    return (e1 == c2 and len({e1, f1, c2, d2}) == 3 and a1 != a2
            and len({a1, b1, a2, b2}) <= 3)


def yields(mode: Mode, s1: Sequence, s2: Sequence) -> set[BoundaryTuple]:
    """All boundary tuples of T1 + T2 obtainable from ``s1`` and ``s2``."""
    mode = Mode.parse(mode)
    if not composable(mode, s1, s2):
        return set()
    a1, b1, c1, d1, e1, f1 = s1
    a2, b2, c2, d2, e2, f2 = s2
    out = set()
    if mode.is_avd:
        for a in ALL - {a1, a2}:
            missing = ALL - {a, a1, a2}
            if missing != b1 and missing != b2:
                out.add(BoundaryTuple(a, missing, c1, d1, e2, f2))
        return out
    for b in ALL - {a1, b1, a2, b2}:
        for a in ALL - {b, a1, a2}:
            out.add(BoundaryTuple(a, b, c1, d1, e2, f2))
    return out


def unary_extend(mode: Mode, s1: Sequence) -> set[BoundaryTuple]:
    """Boundary tuples of a degree-2 root placed above a tripole colored by ``s1``."""
    mode = Mode.parse(mode)
    if mode.is_cubic:
        raise ValueError("unary extension is not defined for cubic tripoles")
    a1, b1, c1, d1, e1, f1 = check_tuple(mode, s1)
    out = set()
    if mode.is_avd:
        for a in ALL - {a1}:
            missing = ALL - {a, a1}
            if missing != b1:
                out.add(BoundaryTuple(a, missing, c1, d1, e1, f1))
        return out
    for b in ALL - {a1, b1}:
        for a in ALL - {b, a1}:
            out.add(BoundaryTuple(a, b, c1, d1, e1, f1))
    return out


# ---------------------------------------------------------------------------
# Array layout
# ---------------------------------------------------------------------------

def _family(mode: Mode) -> str:
    return "avd" if mode.is_avd else "total"


@dataclass(frozen=True, eq=False)
class Layout:
    """Index tables shared by every palette of one coloring family."""

    family: str
    heads: tuple          # (a, b) pairs
    tails: tuple          # (c, d) pairs, also used for (e, f)
    head_index: dict
    tail_index: dict
    link: np.ndarray      # link[y1, x2]: T1's y side may be glued to T2's x side
    binary: np.ndarray    # binary[h, h1, h2]: heads h1, h2 may yield head h
    unary: np.ndarray     # unary[h, h1]
    enc: np.ndarray       # enc[h, x, y]: integer key of the tuple
    completable: np.ndarray
    orbit_reps: tuple     # one head per orbit of color permutations
    expand_rep: np.ndarray   # per head: index into orbit_reps
    expand_x: np.ndarray     # per head: tail permutation carrying rep slice to head
    key_bits: int

    @property
    def shape(self) -> tuple[int, int, int]:
        return (len(self.heads), len(self.tails), len(self.tails))

    def tuple_at(self, h: int, x: int, y: int) -> BoundaryTuple:
        return BoundaryTuple(*self.heads[h], *self.tails[x], *self.tails[y])

    def locate(self, t: Sequence) -> tuple[int, int, int]:
        a, b, c, d, e, f = t
        return self.head_index[(a, b)], self.tail_index[(c, d)], self.tail_index[(e, f)]

    def expand(self, slices: np.ndarray) -> np.ndarray:
        """Rebuild a color-symmetric palette from its orbit-representative slices."""
        tx = self.expand_x
        return slices[self.expand_rep[:, None, None], tx[:, :, None], tx[:, None, :]]

    def slices(self, arr: np.ndarray) -> np.ndarray:
        return arr[list(self.orbit_reps)]


def _permute_state(pi: Sequence[int], s):
    if isinstance(s, frozenset):
        return frozenset(pi[c] for c in s)
    return pi[s]


def permute_tuple(pi: Sequence[int], t: Sequence) -> BoundaryTuple:
    """Apply the color permutation ``pi`` (a sequence, color -> color) to a tuple."""
    return BoundaryTuple(*(_permute_state(pi, s) for s in t))


@lru_cache(maxsize=None)
def _layout_for(family: str) -> Layout:
    mode = Mode.SUBCUBIC_AVD if family == "avd" else Mode.SUBCUBIC_TOTAL
    if family == "avd":
        tails = tuple((c, frozenset({d})) for c in COLORS for d in COLORS if c != d)
        heads = tuple((a, frozenset(m)) for a in COLORS for k in (1, 2)
                      for m in itertools.combinations(sorted(ALL - {a}), k))
    else:
        tails = tuple((c, d) for c in COLORS for d in COLORS if c != d)
        heads = tails
    head_index = {h: i for i, h in enumerate(heads)}
    tail_index = {t: i for i, t in enumerate(tails)}
    nh, nt = len(heads), len(tails)

    # tails never interact with the head conditions, so any fixed choice works
    x0, y0 = tails[0], tails[0]
    link = np.zeros((nt, nt), dtype=bool)
    for i, y1 in enumerate(tails):
        for j, x2 in enumerate(tails):
            link[i, j] = any(composable(mode, (*h1, *x0, *y1), (*h2, *x2, *y0))
                             for h1 in heads for h2 in heads)
    y1, x2 = next((tails[i], tails[j]) for i, j in zip(*np.nonzero(link)))
    binary = np.zeros((nh, nh, nh), dtype=bool)
    unary = np.zeros((nh, nh), dtype=bool)
    for i, h1 in enumerate(heads):
        for j, h2 in enumerate(heads):
            for s in yields(mode, (*h1, *x0, *y1), (*h2, *x2, *y0)):
                binary[head_index[(s.a, s.b)], i, j] = True
        for s in unary_extend(mode, (*h1, *x0, *y0)):
            unary[head_index[(s.a, s.b)], i] = True

    enc = np.zeros((nh, nt, nt), dtype=np.int64)
    completable = np.zeros((nh, nt, nt), dtype=bool)
    for h, head in enumerate(heads):
        for x, xt in enumerate(tails):
            for y, yt in enumerate(tails):
                t = (*head, *xt, *yt)
                enc[h, x, y] = encode_tuple(mode, t)
                completable[h, x, y] = is_completable(mode, t)

    # orbit representatives under color permutations and the maps to rebuild
    # every head slice from its representative
    perms = list(itertools.permutations(COLORS))
    reps: list[int] = []
    expand_rep = np.zeros(nh, dtype=np.intp)
    expand_x = np.zeros((nh, nt), dtype=np.intp)
    for h, head in enumerate(heads):
        for r_pos, r in enumerate(reps):
            pi = next((p for p in perms
                       if tuple(_permute_state(p, s) for s in heads[r]) == head), None)
            if pi is not None:
                break
        else:
            reps.append(h)
            r_pos, pi = len(reps) - 1, tuple(COLORS)
        inv = [0] * 4
        for c, pc in enumerate(pi):
            inv[pc] = c
        expand_rep[h] = r_pos
        for x, xt in enumerate(tails):
            expand_x[h, x] = tail_index[tuple(_permute_state(inv, s) for s in xt)]

    return Layout(family, heads, tails, head_index, tail_index, link, binary, unary,
                  enc, completable, tuple(reps), expand_rep, expand_x,
                  18 if family == "avd" else 12)


def layout(mode: Mode | str) -> Layout:
    return _layout_for(_family(Mode.parse(mode)))


# ---------------------------------------------------------------------------
# Palettes
# ---------------------------------------------------------------------------

class Palette:
    """An immutable set of boundary tuples for one mode."""

    __slots__ = ("mode", "array", "_raw", "_hash")

    def __init__(self, mode: Mode | str, array: np.ndarray):
        self.mode = Mode.parse(mode)
        arr = np.ascontiguousarray(array, dtype=bool)
        if arr.shape != layout(self.mode).shape:
            raise ValueError(f"palette array shape {arr.shape} does not fit {self.mode}")
        arr.setflags(write=False)
        self.array = arr
        self._raw = np.packbits(arr).tobytes()
        self._hash = hash((_family(self.mode), self._raw))

    @classmethod
    def empty(cls, mode: Mode | str) -> "Palette":
        return cls(mode, np.zeros(layout(mode).shape, dtype=bool))

    @classmethod
    def from_tuples(cls, mode: Mode | str, tuples: Iterable[Sequence]) -> "Palette":
        mode = Mode.parse(mode)
        lay = layout(mode)
        arr = np.zeros(lay.shape, dtype=bool)
        for t in tuples:
            arr[lay.locate(check_tuple(mode, t))] = True
        return cls(mode, arr)

    @property
    def raw(self) -> bytes:
        """Packed array bytes; a cheap exact identity within one coloring family."""
        return self._raw

    def __len__(self) -> int:
        return int(self.array.sum())

    def __bool__(self) -> bool:
        return bool(self.array.any())

    def __iter__(self) -> Iterator[BoundaryTuple]:
        lay = layout(self.mode)
        idx = np.argwhere(self.array)
        order = np.argsort(lay.enc[tuple(idx.T)], kind="stable")
        for h, x, y in idx[order]:
            yield lay.tuple_at(h, x, y)

    def __contains__(self, t) -> bool:
        try:
            return bool(self.array[layout(self.mode).locate(t)])
        except (KeyError, TypeError, ValueError):
            return False

    def __eq__(self, other) -> bool:
        if not isinstance(other, Palette):
            return NotImplemented
        return _family(self.mode) == _family(other.mode) and self._raw == other._raw

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Palette({self.mode.value}, size={len(self)})"

    @property
    def members(self) -> frozenset[BoundaryTuple]:
        return frozenset(self)

    def encodings(self) -> np.ndarray:
        """Sorted integer keys of the members."""
        return np.sort(layout(self.mode).enc[self.array])

    @property
    def key(self) -> int:
        """Bitset with bit ``encode_tuple(t)`` set for each member ``t``."""
        lay = layout(self.mode)
        bits = np.zeros(1 << lay.key_bits, dtype=bool)
        bits[lay.enc[self.array]] = True
        return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")

    @property
    def hex_key(self) -> str:
        return format(self.key, "x")

    @classmethod
    def from_key(cls, mode: Mode | str, key: int | str) -> "Palette":
        from .model import decode_tuple

        if isinstance(key, str):
            key = int(key, 16)
        mode = Mode.parse(mode)
        out = []
        i = 0
        while key:
            if key & 1:
                out.append(decode_tuple(mode, i))
            key >>= 1
            i += 1
        return cls.from_tuples(mode, out)

    def has_completable(self) -> bool:
        return bool((self.array & layout(self.mode).completable).any())

    def to_json(self, rank: int | None = None) -> dict:
        return {"mode": self.mode.value, "key": self.hex_key, "size": len(self), "rank": rank}


def palette_of_trivial(mode: Mode | str) -> Palette:
    """Boundary colorings of the single-vertex tripole."""
    mode = Mode.parse(mode)
    out = []
    for a, b, c, d in itertools.permutations(COLORS):
        v = frozenset({a}) if mode.is_avd else a
        out.append((b, v, c, v, d, v))
    return Palette.from_tuples(mode, out)


def _check_pair(p1: Palette, p2: Palette) -> None:
    if p1.mode is not p2.mode:
        raise ValueError(f"mode mismatch: {p1.mode} vs {p2.mode}")


def compose_arrays(lay: Layout, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Array form of palette composition for one pair."""
    al = a.astype(np.float32) @ lay.link.astype(np.float32)          # (h1, x, x2)
    nh, nt = lay.binary.shape[0], len(lay.tails)
    # c[h, x, h2, x2] = sum over h1 of binary[h, h1, h2] * al[h1, x, x2]
    c = np.tensordot(lay.binary.astype(np.float32), al, axes=([1], [0]))  # (h, h2, x, x2)
    c = c.transpose(0, 2, 1, 3).reshape(nh, nt, nh * nt)
    r = c @ b.astype(np.float32).reshape(nh * nt, nt)
    return r > 0


def unary_arrays(lay: Layout, a: np.ndarray) -> np.ndarray:
    r = np.tensordot(lay.unary.astype(np.float32), a.astype(np.float32), axes=([1], [0]))
    return r > 0


def palette_compose(p1: Palette, p2: Palette) -> Palette:
    """Union of ``yields`` over all member pairs."""
    _check_pair(p1, p2)
    return Palette(p1.mode, compose_arrays(layout(p1.mode), p1.array, p2.array))


def palette_unary(p: Palette) -> Palette:
    if p.mode.is_cubic:
        raise ValueError("unary extension is not defined in cubic-total mode")
    return Palette(p.mode, unary_arrays(layout(p.mode), p.array))


def compose_naive(p1: Palette, p2: Palette) -> Palette:
    """Reference composition straight from the tuple rules (slow)."""
    _check_pair(p1, p2)
    out = set()
    for s1 in p1:
        for s2 in p2:
            out |= yields(p1.mode, s1, s2)
    return Palette.from_tuples(p1.mode, out)


def unary_naive(p: Palette) -> Palette:
    out = set()
    for s in p:
        out |= unary_extend(p.mode, s)
    return Palette.from_tuples(p.mode, out)


def permute_palette(pi: Sequence[int], p: Palette) -> Palette:
    return Palette.from_tuples(p.mode, (permute_tuple(pi, t) for t in p))


def mirror_palette(p: Palette) -> Palette:
    """Swap the x and y sides of every member."""
    return Palette(p.mode, p.array.transpose(0, 2, 1))
