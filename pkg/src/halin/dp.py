"""Linear-time decision and coloring of (sub)cubic Halin graphs.

The palette of ``H - v`` is folded bottom-up over the tree.  Palettes are
interned per mode and compositions memoized by palette id, so each node costs
a dictionary lookup once the small set of palettes that actually occur has
been seen.  Extraction walks back down, choosing at every node the smallest
pair of child tuples (by integer key) that yields the tuple fixed above it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    Palette,
    compose_arrays,
    layout,
    palette_of_trivial,
    unary_arrays,
)
from .model import (
    COLORS,
    Coloring,
    HalinGraph,
    Mode,
    Tripole,
    check_halin,
    check_tripole,
    edge_key,
    reroot_at_leaf,
)


class NotColorable(ValueError):
    """The graph has no 4-coloring of the requested kind."""


class PaletteEngine:
    """Interned palettes of one mode with memoized composition and extraction choices."""

    def __init__(self, mode: Mode):
        self.mode = mode
        self.lay = lay = layout(mode)
        self.palettes: list[Palette] = []
        self._ids: dict[bytes, int] = {}
        self._compose: dict[tuple[int, int], int] = {}
        self._unary: dict[int, int] = {}
        self._bin_choice: dict[tuple, tuple] = {}
        self._un_choice: dict[tuple, tuple] = {}
        self.trivial = self.intern(palette_of_trivial(mode))
        self._pairs = [np.nonzero(lay.binary[h]) for h in range(len(lay.heads))]
        self._un_heads = [list(np.flatnonzero(lay.unary[h])) for h in range(len(lay.heads))]

    def intern(self, p: Palette) -> int:
        pid = self._ids.get(p.raw)
        if pid is None:
            pid = self._ids[p.raw] = len(self.palettes)
            self.palettes.append(p)
        return pid

    def compose(self, i: int, j: int) -> int:
        pid = self._compose.get((i, j))
        if pid is None:
            arr = compose_arrays(self.lay, self.palettes[i].array, self.palettes[j].array)
            pid = self._compose[(i, j)] = self.intern(Palette(self.mode, arr))
        return pid

    def unary(self, i: int) -> int:
        if self.mode.is_cubic:
            raise ValueError("degree-2 tree vertices are not allowed in cubic-total mode")
        pid = self._unary.get(i)
        if pid is None:
            arr = unary_arrays(self.lay, self.palettes[i].array)
            pid = self._unary[i] = self.intern(Palette(self.mode, arr))
        return pid

    def binary_choice(self, i: int, j: int, s: tuple[int, int, int]):
        """Smallest (s1, s2) in palettes i, j yielding the tuple at index ``s``."""
        key = (i, j, *s)
        hit = self._bin_choice.get(key)
        if hit is not None:
            return hit
        h, x, y = s
        h1, h2 = self._pairs[h]
        enc = self.lay.enc
        rows = self.palettes[i].array[h1, x, :]          # (pairs, y1)
        cols = self.palettes[j].array[h2, :, y]          # (pairs, x2)
        ok = rows[:, :, None] & cols[:, None, :] & self.lay.link
        if not ok.any():
            raise AssertionError("tuple is not produced by the child palettes")
        rank = (enc[h1, x, :].astype(np.int64)[:, :, None] << 20) | enc[h2, :, y][:, None, :]
        p, y1, x2 = np.unravel_index(np.where(ok, rank, np.iinfo(np.int64).max).argmin(), ok.shape)
        hit = self._bin_choice[key] = ((int(h1[p]), x, int(y1)), (int(h2[p]), int(x2), y))
        return hit

    def unary_choice(self, i: int, s: tuple[int, int, int]):
        key = (i, *s)
        hit = self._un_choice.get(key)
        if hit is not None:
            return hit
        h, x, y = s
        a = self.palettes[i].array
        cands = [(int(self.lay.enc[h1, x, y]), h1) for h1 in self._un_heads[h] if a[h1, x, y]]
        if not cands:
            raise AssertionError("tuple is not produced by the child palette")
        hit = self._un_choice[key] = (min(cands)[1], x, y)
        return hit


_ENGINES: dict[Mode, PaletteEngine] = {}


def engine(mode: Mode | str) -> PaletteEngine:
    mode = Mode.parse(mode)
    if mode not in _ENGINES:
        _ENGINES[mode] = PaletteEngine(mode)
    return _ENGINES[mode]


@dataclass
class DPTable:
    """Palette id of every subtripole, indexed by tripole node."""

    engine: PaletteEngine
    tripole: Tripole
    ids: list[int]

    @property
    def palette(self) -> Palette:
        return self.engine.palettes[self.ids[0]]

    def __getitem__(self, node: int) -> Palette:
        return self.engine.palettes[self.ids[node]]


def palette_table(mode: Mode | str, t: Tripole) -> DPTable:
    mode = Mode.parse(mode)
    check_tripole(t, mode)
    eng = engine(mode)
    children = t.children
    ids = [0] * len(children)
    for u in range(len(children) - 1, -1, -1):
        ch = children[u]
        if not ch:
            ids[u] = eng.trivial
        elif len(ch) == 1:
            ids[u] = eng.unary(ids[ch[0]])
        else:
            ids[u] = eng.compose(ids[ch[0]], ids[ch[1]])
    return DPTable(eng, t, ids)


def palette_dp(mode: Mode | str, t: Tripole) -> Palette:
    """Palette of a tripole by recursive composition from the trivial palette."""
    return palette_table(mode, t).palette


def decide(mode: Mode | str, h: HalinGraph, v: int | None = None) -> bool:
    """Does ``h`` have a total (or AVD) 4-coloring?"""
    mode = Mode.parse(mode)
    check_halin(h, mode)
    t, _ = reroot_at_leaf(h, h.leaves[0] if v is None else v)
    return palette_table(mode, t).palette.has_completable()


def extract_coloring(mode: Mode | str, h: HalinGraph) -> Coloring:
    """A 4-coloring of ``h``; total in the total modes, an AVD edge coloring otherwise."""
    mode = Mode.parse(mode)
    check_halin(h, mode)
    v = h.leaves[0]
    t, where = reroot_at_leaf(h, v)
    table = palette_table(mode, t)
    eng, lay = table.engine, table.engine.lay
    root = table.palette.array & lay.completable
    if not root.any():
        raise NotColorable(f"{h} has no {mode} 4-coloring")
    cands = np.argwhere(root)
    s = tuple(int(i) for i in cands[np.argmin(lay.enc[tuple(cands.T)])])

    children = t.children
    first = list(range(len(children)))
    last = list(range(len(children)))
    for u in range(len(children) - 1, -1, -1):
        if children[u]:
            first[u] = first[children[u][0]]
            last[u] = last[children[u][-1]]

    total = not mode.is_avd
    edges: dict[tuple[int, int], int] = {}
    verts: dict[int, int] | None = {} if total else None
    a, b = lay.heads[s[0]]
    c, e = lay.tails[s[1]][0], lay.tails[s[2]][0]
    edges[edge_key(where[0], v)] = a
    edges[edge_key(v, where[first[0]])] = c
    edges[edge_key(where[last[0]], v)] = e
    if total:
        d, f = lay.tails[s[1]][1], lay.tails[s[2]][1]
        (verts[v],) = set(COLORS) - {a, b, c, d, e, f}

    stack = [(0, s)]
    while stack:
        u, s = stack.pop()
        if total:
            verts[where[u]] = lay.heads[s[0]][1]
        ch = children[u]
        if len(ch) == 1:
            s1 = eng.unary_choice(table.ids[ch[0]], s)
            edges[edge_key(where[u], where[ch[0]])] = lay.heads[s1[0]][0]
            stack.append((ch[0], s1))
        elif len(ch) == 2:
            l, r = ch
            s1, s2 = eng.binary_choice(table.ids[l], table.ids[r], s)
            edges[edge_key(where[u], where[l])] = lay.heads[s1[0]][0]
            edges[edge_key(where[u], where[r])] = lay.heads[s2[0]][0]
            edges[edge_key(where[last[l]], where[first[r]])] = lay.tails[s1[2]][0]
            stack.append((l, s1))
            stack.append((r, s2))
    return Coloring(edges, verts)


def validate_coloring(mode: Mode | str, h: HalinGraph, col: Coloring) -> tuple[bool, list[str]]:
    """Check a coloring of ``h``; returns (ok, violations)."""
    mode = Mode.parse(mode)
    problems: list[str] = []
    g = h.to_multipole()
    at: list[list[int]] = [[] for _ in range(g.n)]
    for u, w in g.edges:
        c = col.edge_colors.get(edge_key(u, w))
        if c is None:
            problems.append(f"edge {u}-{w} has no color")
            continue
        if c not in COLORS:
            problems.append(f"edge {u}-{w} has color {c} outside 0..3")
        at[u].append(c)
        at[w].append(c)
    for u in range(g.n):
        if len(set(at[u])) != len(at[u]):
            problems.append(f"edges at vertex {u} repeat a color: {sorted(at[u])}")
    if mode.is_avd:
        for u, w in g.edges:
            if set(at[u]) == set(at[w]):
                problems.append(f"adjacent vertices {u}, {w} see the same colors {sorted(set(at[u]))}")
    else:
        vc = col.vertex_colors or {}
        for u in range(g.n):
            c = vc.get(u)
            if c is None:
                problems.append(f"vertex {u} has no color")
            elif c not in COLORS:
                problems.append(f"vertex {u} has color {c} outside 0..3")
            elif c in at[u]:
                problems.append(f"vertex {u} shares color {c} with an incident edge")
        for u, w in g.edges:
            if u in vc and w in vc and vc[u] == vc[w]:
                problems.append(f"adjacent vertices {u}, {w} share color {vc[u]}")
    return not problems, problems
