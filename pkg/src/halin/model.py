"""Core data types: modes, boundary tuples, plane trees, tripoles and Halin graphs.

Trees are stored flat, as a tuple of child-index tuples in preorder with the
root at index 0, so that very deep trees never hit the recursion limit.  The
plane embedding is carried entirely by the child order.

Tree text format::

    node := "*" | "(" node ("," node)* ")"

Whitespace between tokens is ignored.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

COLORS = (0, 1, 2, 3)


class Mode(enum.Enum):
    CUBIC_TOTAL = "cubic-total"
    SUBCUBIC_TOTAL = "subcubic-total"
    SUBCUBIC_AVD = "subcubic-avd"

    @property
    def is_cubic(self) -> bool:
        return self is Mode.CUBIC_TOTAL

    @property
    def is_avd(self) -> bool:
        return self is Mode.SUBCUBIC_AVD

    @classmethod
    def parse(cls, value: "Mode | str") -> "Mode":
        if isinstance(value, Mode):
            return value
        try:
            return cls(value)
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown mode {value!r} (expected one of: {names})") from None

    def __str__(self) -> str:
        return self.value


class BoundaryTuple(NamedTuple):
    """Coloring of an extended boundary (r, r*, x, x*, y, y*).

    Slots ``a``, ``c``, ``e`` are semi-edge colors.  Slots ``b``, ``d``, ``f``
    are vertex states: a color in the total modes and the frozenset of colors
    missing at the vertex in AVD mode.
    """

    a: int
    b: "int | frozenset[int]"
    c: int
    d: "int | frozenset[int]"
    e: int
    f: "int | frozenset[int]"


class TreeFormatError(ValueError):
    """Malformed tree text, or a tree that is invalid for the requested use."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


# ---------------------------------------------------------------------------
# Boundary tuples
# ---------------------------------------------------------------------------

def _mask(s: Iterable[int]) -> int:
    m = 0
    for c in s:
        m |= 1 << c
    return m


def _unmask(m: int) -> frozenset[int]:
    return frozenset(c for c in COLORS if m >> c & 1)


def tuple_problem(mode: Mode, t: Sequence) -> str | None:
    """Return a description of why ``t`` is malformed for ``mode``, or None."""
    if len(t) != 6:
        return "boundary tuple must have six entries"
    a, b, c, d, e, f = t
    for x in (a, c, e):
        if not isinstance(x, int) or x not in COLORS:
            return f"semi-edge color {x!r} not in 0..3"
    if mode.is_avd:
        for x in (b, d, f):
            if not isinstance(x, frozenset) or not x or not x <= set(COLORS):
                return f"vertex state {x!r} is not a nonempty color set"
        if len(d) != 1 or len(f) != 1:
            return "peripheral vertex states must be singletons"
        if len(b) not in (1, 2):
            return "root vertex state must have one or two missing colors"
        if a in b or c in d or e in f:
            return "a semi-edge color cannot be missing at its own vertex"
    else:
        for x in (b, d, f):
            if not isinstance(x, int) or x not in COLORS:
                return f"vertex color {x!r} not in 0..3"
        if a == b or c == d or e == f:
            return "a semi-edge and its vertex share a color"
    return None


def is_wellformed(mode: Mode, t: Sequence) -> bool:
    return tuple_problem(mode, t) is None


def check_tuple(mode: Mode, t: Sequence) -> BoundaryTuple:
    problem = tuple_problem(mode, t)
    if problem is not None:
        raise ValueError(f"malformed {mode} tuple {tuple(t)!r}: {problem}")
    return BoundaryTuple(*t)


def encode_tuple(mode: Mode, t: Sequence) -> int:
    """Integer key of a boundary tuple.

    Total modes use base-4 digits ``a + 4b + 16c + ... + 1024f``.  AVD mode
    packs ``a(2) | b(4) | c(2) | d(4) | e(2) | f(4)`` bits, ``a`` lowest.
    """
    a, b, c, d, e, f = check_tuple(Mode.parse(mode), t)
    if Mode.parse(mode).is_avd:
        return a | _mask(b) << 2 | c << 6 | _mask(d) << 8 | e << 12 | _mask(f) << 14
    return a + 4 * b + 16 * c + 64 * d + 256 * e + 1024 * f


def decode_tuple(mode: Mode, key: int) -> BoundaryTuple:
    mode = Mode.parse(mode)
    if mode.is_avd:
        if not 0 <= key < 1 << 18:
            raise ValueError(f"AVD tuple key {key} out of range")
        t = (key & 3, _unmask(key >> 2 & 15), key >> 6 & 3,
             _unmask(key >> 8 & 15), key >> 12 & 3, _unmask(key >> 14 & 15))
    else:
        if not 0 <= key < 4 ** 6:
            raise ValueError(f"total tuple key {key} out of range")
        t = tuple(key >> (2 * i) & 3 for i in range(6))
    return check_tuple(mode, t)


# ---------------------------------------------------------------------------
# Plane trees
# ---------------------------------------------------------------------------

Children = tuple[tuple[int, ...], ...]


def _serialize(children: Children) -> str:
    out: list[str] = []
    stack = [(0, 0)]
    while stack:
        u, i = stack.pop()
        ch = children[u]
        if not ch:
            out.append("*")
        elif i == len(ch):
            out.append(")")
        else:
            out.append("(" if i == 0 else ",")
            stack.append((u, i + 1))
            stack.append((ch[i], 0))
    return "".join(out)


def parse_tree(text: str) -> "PlaneTree":
    """Parse tree text into a :class:`PlaneTree` (syntax only, no arity rules)."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    raw = text.encode("utf-8")
    kids: list[list[int]] = []
    stack: list[int] = []
    expect_node = True
    done = False
    offset = 0
    for ch in text:
        pos = offset
        offset += len(ch.encode("utf-8"))
        if ch.isspace():
            continue
        if done:
            raise TreeFormatError(f"unexpected {ch!r} after complete tree", pos)
        if expect_node:
            if ch not in "*(":
                raise TreeFormatError(f"expected '*' or '(' but found {ch!r}", pos)
            nid = len(kids)
            kids.append([])
            if stack:
                kids[stack[-1]].append(nid)
            if ch == "(":
                stack.append(nid)
            else:
                expect_node = False
                done = not stack
        elif ch == ",":
            if not stack:
                raise TreeFormatError("',' outside parentheses", pos)
            expect_node = True
        elif ch == ")":
            if not stack:
                raise TreeFormatError("unbalanced ')'", pos)
            stack.pop()
            done = not stack
        else:
            raise TreeFormatError(f"expected ',' or ')' but found {ch!r}", pos)
    if not kids:
        raise TreeFormatError("empty tree text", len(raw))
    if not done:
        raise TreeFormatError("unexpected end of input", len(raw))
    return PlaneTree(tuple(tuple(c) for c in kids))


def _orient(rot: Sequence[Sequence[int]], root: int, start: int,
            skip: int | None = None) -> tuple[Children, list[int]]:
    """Root an embedded tree at ``root``.

    ``rot[u]`` lists the neighbours of ``u`` in cyclic order.  The root's
    children are ``rot[root]`` rotated to begin at index ``start`` (with
    ``skip`` removed); every other vertex lists its neighbours starting right
    after the one it was entered from.  Returns the preorder child tuples and
    the map from new ids to the ids used in ``rot``.
    """
    order: list[int] = []
    kid_lists: list[list[int]] = []
    stack: list[tuple[int, int | None]] = [(root, None)]
    while stack:
        u, via = stack.pop()
        nbrs = rot[u]
        if via is None:
            seq = list(nbrs[start:]) + list(nbrs[:start])
            if skip is not None:
                seq.remove(skip)
        else:
            k = nbrs.index(via)
            seq = list(nbrs[k + 1:]) + list(nbrs[:k])
        order.append(u)
        kid_lists.append(seq)
        for w in reversed(seq):
            stack.append((w, u))
    new_id = {old: i for i, old in enumerate(order)}
    return tuple(tuple(new_id[w] for w in seq) for seq in kid_lists), order


@dataclass(frozen=True)
class PlaneTree:
    """A rooted plane tree; ``children[u]`` are the children of node ``u``."""

    children: Children

    def __str__(self) -> str:
        return _serialize(self.children)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({str(self)!r})"

    @property
    def n_nodes(self) -> int:
        return len(self.children)

    def is_leaf(self, u: int) -> bool:
        return not self.children[u]

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        """Leaves in left-to-right (preorder) order."""
        return tuple(u for u, ch in enumerate(self.children) if not ch)

    @cached_property
    def internal(self) -> tuple[int, ...]:
        return tuple(u for u, ch in enumerate(self.children) if ch)

    @cached_property
    def parent(self) -> tuple[int, ...]:
        par = [-1] * len(self.children)
        for u, ch in enumerate(self.children):
            for c in ch:
                par[c] = u
        return tuple(par)

    @cached_property
    def sizes(self) -> tuple[int, ...]:
        size = [1] * len(self.children)
        for u in range(len(self.children) - 1, -1, -1):
            for c in self.children[u]:
                size[u] += size[c]
        return tuple(size)

    def subtree_children(self, u: int) -> Children:
        end = u + self.sizes[u]
        return tuple(tuple(c - u for c in self.children[w]) for w in range(u, end))

    def rotation(self, reflect: bool = False) -> list[list[int]]:
        """Neighbours of each node in cyclic plane order (parent first)."""
        par = self.parent
        rot = []
        for u, ch in enumerate(self.children):
            seq = list(ch) if u == 0 else [par[u], *ch]
            rot.append(seq[::-1] if reflect else seq)
        return rot

    def mirror_children(self) -> Children:
        return _orient(self.rotation(reflect=True), 0, 0)[0]


def _join_children(parts: Sequence[Children]) -> Children:
    out: list[tuple[int, ...]] = [()]
    roots = []
    for part in parts:
        base = len(out)
        roots.append(base)
        out.extend(tuple(c + base for c in ch) for ch in part)
    out[0] = tuple(roots)
    return tuple(out)


class Tripole(PlaneTree):
    """A Halin tripole as a rooted plane tree.

    The root node is the root vertex r*; leaves are the peripheral vertices
    in order from the x semi-edge to the y semi-edge.  A single leaf is the
    trivial tripole.
    """

    @property
    def rank(self) -> int:
        return len(self.internal)

    @property
    def is_trivial(self) -> bool:
        return len(self.children) == 1

    @property
    def is_cubic(self) -> bool:
        return all(len(ch) in (0, 2) for ch in self.children)

    @classmethod
    def trivial(cls) -> "Tripole":
        return cls(((),))

    @classmethod
    def join(cls, *parts: "Tripole") -> "Tripole":
        """New root over one child (degree-2 root) or two children (composition)."""
        if len(parts) not in (1, 2):
            raise ValueError("a tripole root has one or two children")
        return cls(_join_children([p.children for p in parts]))

    def subtripole(self, u: int) -> "Tripole":
        return Tripole(self.subtree_children(u))

    def mirror(self) -> "Tripole":
        return Tripole(self.mirror_children())

    def to_multipole(self) -> "Multipole":
        leaves = self.leaves
        edges = [(u, c) for u, ch in enumerate(self.children) for c in ch]
        edges += list(zip(leaves, leaves[1:]))
        return Multipole(self.n_nodes, tuple(edges), (0, leaves[0], leaves[-1]))


def check_tripole(t: Tripole, mode: Mode) -> None:
    for u, ch in enumerate(t.children):
        if len(ch) > 2 or (mode.is_cubic and len(ch) == 1):
            raise TreeFormatError(
                f"tripole node {u} has {len(ch)} children, not allowed in {mode}")


def parse_tripole(text: str, mode: Mode | str = Mode.SUBCUBIC_TOTAL) -> Tripole:
    tree = parse_tree(text)
    t = Tripole(tree.children)
    check_tripole(t, Mode.parse(mode))
    return t


def decompose(t: Tripole) -> tuple[Tripole, ...]:
    """Children of the root as tripoles: () trivial, (T1,) unary, (T1, T2) binary."""
    return tuple(t.subtripole(c) for c in t.children[0])


# ---------------------------------------------------------------------------
# Halin graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Multipole:
    """Graph with semi-edges; ``semi`` lists the end vertex of each semi-edge."""

    n: int
    edges: tuple[tuple[int, int], ...]
    semi: tuple[int, ...] = ()

    @cached_property
    def degree(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        for u in self.semi:
            deg[u] += 1
        return tuple(deg)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(a) for a in adj)


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


@dataclass
class Coloring:
    """Colors of a graph's elements; ``vertex_colors`` is None for edge colorings."""

    edge_colors: dict[tuple[int, int], int]
    vertex_colors: dict[int, int] | None = None

    def to_json(self) -> dict:
        out: dict = {"edges": [[u, v, c] for (u, v), c in sorted(self.edge_colors.items())]}
        if self.vertex_colors is not None:
            out["vertices"] = [[u, c] for u, c in sorted(self.vertex_colors.items())]
        return out


class HalinGraph(PlaneTree):
    """A Halin graph given by its plane tree; vertices are the tree's node ids."""

    @property
    def peripheral(self) -> tuple[int, ...]:
        return self.leaves

    @property
    def spanning(self) -> tuple[int, ...]:
        return self.internal

    @cached_property
    def spanning_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, c) for u, ch in enumerate(self.children) for c in ch)

    @cached_property
    def peripheral_edges(self) -> tuple[tuple[int, int], ...]:
        lv = self.leaves
        return tuple((lv[i], lv[(i + 1) % len(lv)]) for i in range(len(lv)))

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self.spanning_edges + self.peripheral_edges

    @property
    def is_cubic(self) -> bool:
        return all(len(ch) == 3 for ch in self.children[:1]) and all(
            len(ch) in (0, 2) for ch in self.children[1:])

    def to_multipole(self) -> Multipole:
        return Multipole(self.n_nodes, self.edges)

    def mirror(self) -> "HalinGraph":
        return HalinGraph(self.mirror_children())


def check_halin(h: HalinGraph, mode: Mode) -> None:
    root = h.children[0]
    if len(root) < 2:
        raise TreeFormatError("a Halin tree root must be internal with at least 2 children")
    if len(h.leaves) < 3:
        raise TreeFormatError(f"a Halin graph needs at least 3 leaves, got {len(h.leaves)}")
    if mode.is_cubic:
        if len(root) != 3 or any(len(ch) not in (0, 2) for ch in h.children[1:]):
            raise TreeFormatError("cubic Halin trees need internal degree exactly 3")
    elif len(root) > 3 or any(len(ch) > 2 for ch in h.children[1:]):
        raise TreeFormatError("subcubic Halin trees need internal degree at most 3")


def parse_halin(text: str, mode: Mode | str = Mode.SUBCUBIC_TOTAL) -> HalinGraph:
    h = HalinGraph(parse_tree(text).children)
    check_halin(h, Mode.parse(mode))
    return h


def reroot_at_leaf(h: HalinGraph, v: int) -> tuple[Tripole, list[int]]:
    """Tripole ``H - v`` plus the map from tripole node ids to vertices of ``h``."""
    if not 0 <= v < h.n_nodes or h.children[v]:
        raise ValueError(f"vertex {v} is not a peripheral vertex")
    p = h.parent[v]
    rot = h.rotation()
    children, order = _orient(rot, p, rot[p].index(v) + 1, skip=v)
    return Tripole(children), order


def tripole_of(h: HalinGraph, v: int) -> Tripole:
    """The tripole obtained from ``h`` by deleting the peripheral vertex ``v``."""
    return reroot_at_leaf(h, v)[0]


def close_tripole(t: Tripole) -> HalinGraph:
    """Inverse of :func:`tripole_of`: add the vertex v back after the y side."""
    if t.is_trivial:
        raise ValueError("the trivial tripole does not close into a Halin graph")
    leaf = ((),)
    return HalinGraph(_join_children(
        [t.subtree_children(c) for c in t.children[0]] + [leaf]))


def _rooted_string(rot: Sequence[Sequence[int]], root: int, start: int) -> str:
    """Tree text of ``_orient(rot, root, start)`` without building the tree."""
    out: list[str] = []
    stack: list = [(root, -1)]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        u, via = item
        nbrs = rot[u]
        if via < 0:
            seq = nbrs[start:] + nbrs[:start]
        else:
            k = nbrs.index(via)
            seq = nbrs[k + 1:] + nbrs[:k]
        if not seq:
            out.append("*")
            continue
        out.append("(")
        stack.append(")")
        for i in range(len(seq) - 1, -1, -1):
            stack.append((seq[i], u))
            if i:
                stack.append(",")
    return "".join(out)


def canonical_form(h: HalinGraph) -> str:
    """Least tree string over rerootings, rotations and reflection.

    Only vertices of maximum degree are tried as roots; that set is invariant
    under isomorphism, so the result is still canonical.
    """
    best: str | None = None
    rot0 = h.rotation()
    top = max(len(rot0[u]) for u in h.internal)
    roots = [u for u in h.internal if len(rot0[u]) == top]
    for reflect in (False, True):
        rot = h.rotation(reflect)
        for u in roots:
            for i in range(len(rot[u])):
                s = _rooted_string(rot, u, i)
                if best is None or s < best:
                    best = s
    assert best is not None
    return best
