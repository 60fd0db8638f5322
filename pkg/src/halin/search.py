"""Exhaustive search for Type-2 (sub)cubic Halin graphs.

Every Halin graph with L leaves is the closure of a tripole with L - 1
leaves, and it is Type 2 exactly when that tripole's palette has no
completable tuple.  The search therefore works on palettes: for each
(rank, leaves) class it computes the set of realized palette indices from
the closure's composition table, which is a handful of numpy gathers instead
of a walk over millions of trees.  Tripoles are only materialized for the
incompletable palettes, by backtracking through the same table.

:func:`enum_tripoles` and :func:`enum_halin` build trees explicitly; they
serve as the cross-check at small bounds.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .closure import Stratification, get_closure, incompletable_mask
from .dp import decide, palette_dp
from .model import (
    HalinGraph,
    Mode,
    Tripole,
    canonical_form,
    check_halin,
    close_tripole,
    parse_halin,
    tripole_of,
)
from .oracle import snd_tripole_empty

Key = tuple[int, int]  # (rank, leaves)


def _splits(mode: Mode, r: int, l: int) -> Iterator[tuple[Key, Key]]:
    for r1 in range(r):
        for l1 in range(1, l):
            yield (r1, l1), (r - 1 - r1, l - l1)


def _keys(mode: Mode, max_rank: int, max_leaves: int) -> Iterator[Key]:
    """(rank, leaves) classes in an order where sub-classes come first."""
    for r in range(1, max_rank + 1):
        for l in range(1, max_leaves + 1):
            if mode.is_cubic and l != r + 1:
                continue
            yield r, l


def realized_sets(s: Stratification, max_rank: int, max_leaves: int) -> dict[Key, np.ndarray]:
    """Palette indices realized by tripoles of each exact (rank, leaves)."""
    mode = s.mode
    sets: dict[Key, np.ndarray] = {(0, 1): np.array([0])}
    for r, l in _keys(mode, max_rank, max_leaves):
        parts = []
        for k1, k2 in _splits(mode, r, l):
            if k1 in sets and k2 in sets:
                parts.append(s.table[np.ix_(sets[k1], sets[k2])].ravel())
        if not mode.is_cubic and (r - 1, l) in sets:
            parts.append(s.unary[sets[(r - 1, l)]])
        if parts:
            found = np.unique(np.concatenate(parts))
            if found.size and found[0] < 0:
                raise RuntimeError("composition table has a missing entry")
            sets[(r, l)] = found
    return sets


def tripole_counts(mode: Mode | str, max_rank: int, max_leaves: int) -> dict[Key, int]:
    """Number of plane tripoles in each (rank, leaves) class."""
    mode = Mode.parse(mode)
    counts = {(0, 1): 1}
    for r, l in _keys(mode, max_rank, max_leaves):
        n = sum(counts.get(k1, 0) * counts.get(k2, 0) for k1, k2 in _splits(mode, r, l))
        if not mode.is_cubic:
            n += counts.get((r - 1, l), 0)
        if n:
            counts[(r, l)] = n
    return counts


class _Witnesses:
    """All tripoles of a given (rank, leaves) realizing a given palette index."""

    def __init__(self, s: Stratification, sets: dict[Key, np.ndarray]):
        self.s = s
        self.sets = sets
        self.memo: dict[tuple[int, int, int], list[Tripole]] = {(0, 1, 0): [Tripole.trivial()]}

    def __call__(self, key: Key, pid: int) -> list[Tripole]:
        memo_key = (*key, pid)
        if memo_key in self.memo:
            return self.memo[memo_key]
        s, sets = self.s, self.sets
        r, l = key
        out: list[Tripole] = []
        for k1, k2 in _splits(s.mode, r, l):
            if k1 not in sets or k2 not in sets:
                continue
            a, b = sets[k1], sets[k2]
            for i, j in np.argwhere(s.table[np.ix_(a, b)] == pid):
                rights = self(k2, int(b[j]))
                for t1 in self(k1, int(a[i])):
                    out.extend(Tripole.join(t1, t2) for t2 in rights)
        if not s.mode.is_cubic and (r - 1, l) in sets:
            a = sets[(r - 1, l)]
            for i in np.flatnonzero(s.unary[a] == pid):
                out.extend(Tripole.join(t1) for t1 in self((r - 1, l), int(a[i])))
        self.memo[memo_key] = out
        return out


def _graph_order(h: HalinGraph) -> tuple:
    return (len(h.leaves), len(h.internal), str(h))


@dataclass
class SearchResult:
    mode: Mode
    max_leaves: int
    max_spanning: int
    graphs: list[HalinGraph]
    bad_tripoles: list[Tripole] = field(default_factory=list)
    examined: int = 0

    def summary(self) -> list[dict]:
        return [{"graph": str(h), "leaves": len(h.leaves), "spanning": len(h.internal),
                 "n_vertices": h.n_nodes} for h in self.graphs]

    def to_json(self) -> dict:
        return {"mode": self.mode.value, "max_leaves": self.max_leaves,
                "max_spanning": self.max_spanning, "graphs_examined": self.examined,
                "type2": self.summary(),
                "bad_tripoles": [str(t) for t in self.bad_tripoles]}

    def to_text(self) -> str:
        lines = [f"mode {self.mode}: {len(self.graphs)} Type-2 graphs with at most "
                 f"{self.max_leaves} leaves and {self.max_spanning} spanning vertices "
                 f"({self.examined} tripoles examined)"]
        for row in self.summary():
            lines.append(f"  leaves={row['leaves']:<3} spanning={row['spanning']:<3} {row['graph']}")
        return "\n".join(lines)


def find_type2(mode: Mode | str, max_leaves: int, max_spanning: int | None = None,
               closure: Stratification | None = None, method: str = "closure") -> SearchResult:
    """All Type-2 Halin graphs within the bounds, one canonical representative each.

    ``method="explicit"`` enumerates trees and decides each one with the DP;
    the default works on the closure table and is exponentially faster.
    """
    mode = Mode.parse(mode)
    max_spanning = max_leaves if max_spanning is None else max_spanning
    if mode.is_cubic:
        max_spanning = min(max_spanning, max_leaves - 2)
    if method == "explicit":
        graphs = [h for h in enum_halin(mode, max_leaves, max_spanning) if not decide(mode, h)]
        examined = sum(tripole_counts(mode, max_spanning, max_leaves - 1).values())
        return SearchResult(mode, max_leaves, max_spanning, graphs, [], examined)
    if method != "closure":
        raise ValueError(f"unknown search method {method!r}")

    s = closure if closure is not None else get_closure(mode)
    sets = realized_sets(s, max_spanning, max_leaves - 1)
    bad = incompletable_mask(s)
    witnesses = _Witnesses(s, sets)
    bad_tripoles: list[Tripole] = []
    for key in sorted(sets):
        for pid in sets[key]:
            if bad[pid]:
                bad_tripoles.extend(witnesses(key, int(pid)))
    found: dict[str, HalinGraph] = {}
    for t in bad_tripoles:
        if len(t.leaves) < 2:
            continue
        h = close_tripole(t)
        check_halin(h, mode)
        form = canonical_form(h)
        found.setdefault(form, parse_halin(form, mode))
    graphs = sorted(found.values(), key=_graph_order)
    examined = sum(tripole_counts(mode, max_spanning, max_leaves - 1).values())
    return SearchResult(mode, max_leaves, max_spanning, graphs, bad_tripoles, examined)


# ---------------------------------------------------------------------------
# Explicit enumeration
# ---------------------------------------------------------------------------

def enum_tripoles(mode: Mode | str, max_rank: int, max_leaves: int | None = None) -> dict[Key, list[Tripole]]:
    """Every plane tripole within the bounds, grouped by (rank, leaves)."""
    mode = Mode.parse(mode)
    max_leaves = max_rank + 1 if max_leaves is None else max_leaves
    out: dict[Key, list[Tripole]] = {(0, 1): [Tripole.trivial()]}
    for r, l in _keys(mode, max_rank, max_leaves):
        ts = [Tripole.join(t1, t2) for k1, k2 in _splits(mode, r, l)
              for t1 in out.get(k1, ()) for t2 in out.get(k2, ())]
        if not mode.is_cubic:
            ts.extend(Tripole.join(t1) for t1 in out.get((r - 1, l), ()))
        if ts:
            out[(r, l)] = ts
    return out


def iter_tripoles(mode: Mode | str, max_rank: int, max_leaves: int | None = None) -> Iterator[Tripole]:
    """Tripoles in order of rank, then leaves, then construction order."""
    groups = enum_tripoles(mode, max_rank, max_leaves)
    for key in sorted(groups):
        yield from groups[key]


def enum_halin(mode: Mode | str, max_leaves: int, max_spanning: int | None = None) -> list[HalinGraph]:
    """Every Halin graph within the bounds, up to plane isomorphism and reflection."""
    mode = Mode.parse(mode)
    max_spanning = max_leaves if max_spanning is None else max_spanning
    found: dict[str, HalinGraph] = {}
    for key, ts in enum_tripoles(mode, max_spanning, max_leaves - 1).items():
        if key[1] < 2:
            continue
        for t in ts:
            h = close_tripole(t)
            form = canonical_form(h)
            if form not in found:
                found[form] = parse_halin(form, mode)
    return sorted(found.values(), key=_graph_order)


# ---------------------------------------------------------------------------
# Bad-tripole audit
# ---------------------------------------------------------------------------

@dataclass
class AuditReport:
    mode: Mode
    tripoles: list[Tripole]                 # trivial tripole plus every T_v of every Type-2 graph and its mirror
    palette_of: dict[str, int]              # tripole string -> closure index
    ranks: dict[int, int]                   # closure index -> palette rank
    incompletable: list[int]
    unexplained: list[int]                  # incompletable palettes no listed tripole realizes
    search_agrees: bool                     # bad tripoles of the search == listed tripoles

    @property
    def realized(self) -> dict[int, list[Tripole]]:
        out: dict[int, list[Tripole]] = defaultdict(list)
        for t in self.tripoles:
            out[self.palette_of[str(t)]].append(t)
        return dict(out)

    @property
    def shared(self) -> dict[int, list[Tripole]]:
        return {p: ts for p, ts in self.realized.items() if len(ts) > 1}

    def to_json(self) -> dict:
        return {
            "mode": self.mode.value,
            "n_tripoles": len(self.tripoles),
            "n_palettes": len(self.realized),
            "n_incompletable": len(self.incompletable),
            "realized_equals_incompletable": set(self.realized) == set(self.incompletable),
            "search_agrees": self.search_agrees,
            "shared": [{"palette": p, "rank": self.ranks[p],
                        "tripoles": [str(t) for t in ts],
                        "tripole_ranks": [t.rank for t in ts]}
                       for p, ts in sorted(self.shared.items())],
            "unexplained": [{"palette": p, "rank": self.ranks[p]} for p in self.unexplained],
            "by_palette": [{"palette": p, "rank": self.ranks[p], "tripoles": [str(t) for t in ts]}
                           for p, ts in sorted(self.realized.items())],
        }

    def to_text(self) -> str:
        d = self.to_json()
        lines = [f"audit ({self.mode}): {d['n_tripoles']} bad tripoles realize "
                 f"{d['n_palettes']} palettes; closure has {d['n_incompletable']} incompletable",
                 f"  realized set equals incompletable set: {d['realized_equals_incompletable']}",
                 f"  search bad tripoles match Type-2 graph tripoles: {self.search_agrees}"]
        for row in d["shared"]:
            lines.append(f"  palette {row['palette']} (rank {row['rank']}) realized by "
                         f"{len(row['tripoles'])} tripoles of ranks {row['tripole_ranks']}")
        for row in d["unexplained"]:
            lines.append(f"  palette {row['palette']} (rank {row['rank']}) has no Type-2 graph tripole")
        return "\n".join(lines)


def bad_tripole_audit(result: SearchResult, closure: Stratification | None = None) -> AuditReport:
    """Relate the Type-2 graphs found by a search to the incompletable palettes."""
    mode = result.mode
    s = closure if closure is not None else get_closure(mode)
    tripoles: dict[str, Tripole] = {str(Tripole.trivial()): Tripole.trivial()}
    for h in result.graphs:
        for g in (h, h.mirror()):
            for v in g.leaves:
                t = tripole_of(g, v)
                tripoles.setdefault(str(t), t)
    listed = sorted(tripoles.values(), key=lambda t: (t.rank, str(t)))
    palette_of = {str(t): s.index_of(palette_dp(mode, t)) for t in listed}
    incompletable = [int(i) for i in np.flatnonzero(incompletable_mask(s))]
    realized = set(palette_of.values())
    unexplained = [p for p in incompletable if p not in realized]
    searched = {str(t) for t in result.bad_tripoles if len(t.leaves) >= 2 or t.is_trivial}
    agrees = searched == set(tripoles) if result.bad_tripoles else False
    ranks = {int(i): int(s.ranks[i]) for i in set(incompletable) | realized}
    return AuditReport(mode, listed, palette_of, ranks, incompletable, unexplained, agrees)


# ---------------------------------------------------------------------------
# SND and random instances
# ---------------------------------------------------------------------------

def snd_search(max_rank: int, k: int = 4, max_leaves: int | None = None) -> Iterator[Tripole]:
    """Subcubic tripoles, smallest first, whose SND k-palette is empty."""
    for t in iter_tripoles(Mode.SUBCUBIC_TOTAL, max_rank, max_leaves):
        if snd_tripole_empty(t, k):
            yield t


def random_tripole(n_leaves: int, rng: random.Random | int | None = None,
                   subdivide: float = 0.0) -> Tripole:
    """Uniform random binary plane tripole (Remy's algorithm).

    With ``subdivide > 0`` each non-root tree edge independently gets a
    degree-2 vertex with that probability.
    """
    if n_leaves < 1:
        raise ValueError("a tripole has at least one leaf")
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    left, right, parent = [-1], [-1], [-1]
    root = 0
    for _ in range(n_leaves - 1):
        x = rng.randrange(len(left))
        y, z = len(left), len(left) + 1
        left += [-1, -1]
        right += [-1, -1]
        parent += [parent[x], y]
        p = parent[x]
        if p < 0:
            root = y
        elif left[p] == x:
            left[p] = y
        else:
            right[p] = y
        parent[x] = y
        left[y], right[y] = (x, z) if rng.random() < 0.5 else (z, x)

    # preorder relabelling; stack entries are (old id, new parent id or -1)
    children: list[list[int]] = []
    stack = [(root, -1)]
    while stack:
        u, p = stack.pop()
        if p >= 0:
            while subdivide and rng.random() < subdivide:
                children.append([])
                children[p].append(len(children) - 1)
                p = len(children) - 1
        new = len(children)
        children.append([])
        if p >= 0:
            children[p].append(new)
        if left[u] >= 0:
            stack.append((right[u], new))
            stack.append((left[u], new))
    return Tripole(tuple(tuple(ch) for ch in children))


def random_halin(mode: Mode | str, n_leaves: int, rng: random.Random | int | None = None,
                 subdivide: float = 0.0) -> HalinGraph:
    """Random Halin graph with ``n_leaves`` leaves; degree-2 vertices only outside cubic mode."""
    mode = Mode.parse(mode)
    if n_leaves < 3:
        raise ValueError("a Halin graph has at least 3 leaves")
    h = close_tripole(random_tripole(n_leaves - 1, rng, 0.0 if mode.is_cubic else subdivide))
    check_halin(h, mode)
    return h

