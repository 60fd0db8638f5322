"""Brute-force ground truth, independent of the palette algebra.

Everything here is plain backtracking over the elements of a graph with
semi-edges.  Semi-edges are edges with a single end: they take part in
properness at that end and in the color set seen there.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterator, Sequence

from .algebra import Palette
from .model import (
    COLORS,
    Coloring,
    HalinGraph,
    Mode,
    Multipole,
    PlaneTree,
    Tripole,
    check_tripole,
    edge_key,
)


def as_multipole(g) -> Multipole:
    if isinstance(g, Multipole):
        return g
    if isinstance(g, (HalinGraph, Tripole)):
        return g.to_multipole()
    if isinstance(g, PlaneTree):
        return HalinGraph(g.children).to_multipole()
    raise TypeError(f"cannot interpret {type(g).__name__} as a graph")


class _Elements:
    """Vertices, edges and semi-edges of a multipole, numbered in search order.

    Ids: vertices ``0..n-1``, edges ``n..n+m-1``, semi-edges after that.
    """

    def __init__(self, g: Multipole, with_vertices: bool):
        self.g = g
        n, m = g.n, len(g.edges)
        self.ends: list[tuple[int, ...]] = [(v,) for v in range(n)]
        self.ends += [tuple(e) for e in g.edges]
        self.ends += [(v,) for v in g.semi]
        self.incident: list[list[int]] = [[] for _ in range(n)]
        for i, e in enumerate(g.edges):
            for v in e:
                self.incident[v].append(n + i)
        for i, v in enumerate(g.semi):
            self.incident[v].append(n + m + i)

        conflicts: list[set[int]] = [set() for _ in self.ends]
        for v in range(n):
            inc = self.incident[v]
            for a in inc:
                conflicts[a].update(x for x in inc if x != a)
                if with_vertices:
                    conflicts[a].add(v)
                    conflicts[v].add(a)
        if with_vertices:
            for u, v in g.edges:
                conflicts[u].add(v)
                conflicts[v].add(u)
        self.conflicts = [sorted(c) for c in conflicts]
        self.order = self._bfs_order(with_vertices)

    def _bfs_order(self, with_vertices: bool) -> list[int]:
        g = self.g
        deg = g.degree
        if g.n == 0:
            return []
        start = min(range(g.n), key=lambda v: (deg[v] != 3 or v in g.semi, v))
        seen_v = [False] * g.n
        placed = [False] * len(self.ends)
        order: list[int] = []
        for root in [start, *range(g.n)]:
            if seen_v[root]:
                continue
            seen_v[root] = True
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for el in self.incident[u]:
                    if not placed[el]:
                        placed[el] = True
                        order.append(el)
                if with_vertices:
                    order.append(u)
                for w in g.adjacency[u]:
                    if not seen_v[w]:
                        seen_v[w] = True
                        queue.append(w)
        return order


def _backtrack(order: Sequence[int], conflicts: Sequence[Sequence[int]], k: int,
               check: Callable[[int, list[int]], bool] | None = None) -> Iterator[list[int]]:
    """Yield every assignment (the same list object, mutated) in smallest-color-first order."""
    colors = [-1] * len(conflicts)
    n = len(order)

    def rec(i: int) -> Iterator[list[int]]:
        if i == n:
            yield colors
            return
        el = order[i]
        used = 0
        for f in conflicts[el]:
            if colors[f] >= 0:
                used |= 1 << colors[f]
        for c in range(k):
            if used >> c & 1:
                continue
            colors[el] = c
            if check is None or check(i, colors):
                yield from rec(i + 1)
        colors[el] = -1

    return rec(0)


def _neighbourhood_check(els: _Elements, distinct: Callable[[int, int], bool]):
    """Check built on vertex colour-sets, applied as soon as both ends are complete."""
    g = els.g
    pos = {el: i for i, el in enumerate(els.order)}
    done_at = [max((pos[e] for e in els.incident[v]), default=-1) for v in range(g.n)]
    finishing: list[list[int]] = [[] for _ in els.order]
    for v in range(g.n):
        if done_at[v] >= 0:
            finishing[done_at[v]].append(v)
    incident = els.incident

    def color_set(v: int, colors: list[int]) -> int:
        s = 0
        for e in incident[v]:
            s |= 1 << colors[e]
        return s

    def check(i: int, colors: list[int]) -> bool:
        for v in finishing[i]:
            sv = color_set(v, colors)
            for w in g.adjacency[v]:
                if 0 <= done_at[w] <= i and not distinct(sv, color_set(w, colors)):
                    return False
        return True

    return check


def _avd_distinct(s: int, t: int) -> bool:
    return s != t


def _snd_distinct(s: int, t: int) -> bool:
    return (s & ~t) != 0 and (t & ~s) != 0


def _total_colorings(g: Multipole, k: int) -> tuple[_Elements, Iterator[list[int]]]:
    els = _Elements(g, with_vertices=True)
    return els, _backtrack(els.order, els.conflicts, k)


def _edge_colorings(g: Multipole, k: int, distinct) -> tuple[_Elements, Iterator[list[int]]]:
    els = _Elements(g, with_vertices=False)
    order = [e for e in els.order if e >= g.n]
    return els, _backtrack(order, els.conflicts, k, _neighbourhood_check(els, distinct))


def _to_coloring(els: _Elements, colors: list[int], with_vertices: bool) -> Coloring:
    g = els.g
    edges = {edge_key(u, v): colors[g.n + i] for i, (u, v) in enumerate(g.edges)}
    verts = {v: colors[v] for v in range(g.n)} if with_vertices else None
    return Coloring(edges, verts)


def brute_total(g, k: int = 4) -> Coloring | None:
    """First total k-coloring found, or None when none exists."""
    els, it = _total_colorings(as_multipole(g), k)
    for colors in it:
        return _to_coloring(els, colors, True)
    return None


def brute_avd(g, k: int = 4) -> Coloring | None:
    """First proper k-edge-coloring with distinct color sets on adjacent vertices."""
    els, it = _edge_colorings(as_multipole(g), k, _avd_distinct)
    for colors in it:
        return _to_coloring(els, colors, False)
    return None


def brute_snd(g, k: int = 4) -> Coloring | None:
    """First proper k-edge-coloring where no adjacent color set contains the other."""
    els, it = _edge_colorings(as_multipole(g), k, _snd_distinct)
    for colors in it:
        return _to_coloring(els, colors, False)
    return None


def count_colorings(g, k: int, kind: str = "total") -> int:
    """Number of valid colorings found by the backtracking search."""
    g = as_multipole(g)
    if kind == "total":
        _, it = _total_colorings(g, k)
    else:
        _, it = _edge_colorings(g, k, {"avd": _avd_distinct, "snd": _snd_distinct}[kind])
    return sum(1 for _ in it)


def count_colorings_naive(g, k: int, kind: str = "total") -> int:
    """Same count by filtering the whole product space; only for tiny graphs."""
    from itertools import product

    g = as_multipole(g)
    n, m = g.n, len(g.edges)
    ends = [tuple(e) for e in g.edges] + [(v,) for v in g.semi]
    total = 0
    n_vert = n if kind == "total" else 0
    for assign in product(range(k), repeat=n_vert + len(ends)):
        vcol, ecol = assign[:n_vert], assign[n_vert:]
        at: list[list[int]] = [[] for _ in range(n)]
        for e, c in zip(ends, ecol):
            for v in e:
                at[v].append(c)
        if any(len(set(cs)) != len(cs) for cs in at):
            continue
        if kind == "total":
            if any(vcol[u] == vcol[v] for u, v in g.edges):
                continue
            if any(vcol[v] in at[v] for v in range(n)):
                continue
        else:
            test = _avd_distinct if kind == "avd" else _snd_distinct
            sets = [sum(1 << c for c in cs) for cs in at]
            if any(not test(sets[u], sets[v]) for u, v in g.edges):
                continue
        total += 1
    return total


def _missing(colors: list[int], incident: Sequence[int]) -> frozenset[int]:
    return frozenset(COLORS) - {colors[e] for e in incident}


def palette_brute(mode: Mode | str, t: Tripole) -> Palette:
    """Boundary colorings of every valid coloring of ``t``, by exhaustive search."""
    mode = Mode.parse(mode)
    check_tripole(t, mode)
    g = t.to_multipole()
    n, m = g.n, len(g.edges)
    r_semi, x_semi, y_semi = n + m, n + m + 1, n + m + 2
    r_v, x_v, y_v = g.semi
    out = set()
    if mode.is_avd:
        els, it = _edge_colorings(g, 4, _avd_distinct)
        inc = els.incident
        for c in it:
            out.add((c[r_semi], _missing(c, inc[r_v]), c[x_semi], _missing(c, inc[x_v]),
                     c[y_semi], _missing(c, inc[y_v])))
    else:
        _, it = _total_colorings(g, 4)
        for c in it:
            out.add((c[r_semi], c[r_v], c[x_semi], c[x_v], c[y_semi], c[y_v]))
    return Palette.from_tuples(mode, out)


def snd_tripole_empty(t: Tripole, k: int = 4) -> bool:
    """True when no SND k-edge-coloring of the tripole exists."""
    return brute_snd(t.to_multipole(), k) is None
