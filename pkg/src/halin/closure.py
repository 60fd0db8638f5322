"""Fixpoint enumeration of realizable palettes and the analyses built on it.

Every realizable palette is invariant under the 24 color permutations (the
trivial palette is, and composition commutes with recoloring), so a palette
is pinned down by its slices at one head per color orbit.  The enumeration
identifies composition results through those slices, which lets one matrix
product evaluate a palette against every other palette at once.  Each newly
found palette is rebuilt in full through the ordinary composition and checked
against its slice.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .algebra import (
    Layout,
    Palette,
    compose_arrays,
    layout,
    palette_of_trivial,
    unary_arrays,
)
from .model import Mode

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
EMPTY_STRATA_TO_STOP = 4


class Production(NamedTuple):
    kind: str                    # "binary" or "unary"
    factors: tuple[int, ...]     # palette indices: (left, right) or (child,)

    def to_json(self) -> dict:
        if self.kind == "binary":
            return {"kind": "binary", "left": self.factors[0], "right": self.factors[1]}
        return {"kind": "unary", "child": self.factors[0]}


class _SliceComposer:
    """Batched composition evaluated only at the orbit-representative heads."""

    def __init__(self, lay: Layout):
        self.lay = lay
        self.nh, self.nt = len(lay.heads), len(lay.tails)
        self.link = lay.link.astype(np.float32)
        self.reps = [(pos, rep) for pos, rep in enumerate(lay.orbit_reps)
                     if lay.binary[rep].any()]
        self.n_reps = len(lay.orbit_reps)

    def left(self, arrays: np.ndarray) -> list[np.ndarray]:
        m = arrays.shape[0]
        al = arrays.astype(np.float32) @ self.link                  # (m, h1, x, x2)
        out = []
        for _, rep in self.reps:
            w = self.lay.binary[rep].astype(np.float32)              # (h1, h2)
            s = np.tensordot(w, al, axes=([0], [1]))                 # (h2, m, x, x2)
            out.append(s.transpose(1, 2, 0, 3).reshape(m * self.nt, self.nh * self.nt))
        return out

    def right(self, arrays: np.ndarray) -> np.ndarray:
        n = arrays.shape[0]
        return np.ascontiguousarray(
            arrays.astype(np.float32).transpose(1, 2, 0, 3).reshape(self.nh * self.nt, n * self.nt))

    def slices(self, left: list[np.ndarray], right: np.ndarray) -> np.ndarray:
        """Result slices, shape (m, n, n_reps, nt, nt)."""
        m = left[0].shape[0] // self.nt if left else 0
        n = right.shape[1] // self.nt
        out = np.zeros((m, n, self.n_reps, self.nt, self.nt), dtype=bool)
        for (pos, _), lmat in zip(self.reps, left):
            prod = (lmat @ right).reshape(m, self.nt, n, self.nt)
            out[:, :, pos] = prod.transpose(0, 2, 1, 3) > 0
        return out


def _pack_rows(slices: np.ndarray) -> np.ndarray:
    """Pack trailing slice dims into one void-typed row per result."""
    lead = slices.shape[:-3]
    flat = np.packbits(slices.reshape(*lead, -1), axis=-1)
    flat = np.ascontiguousarray(flat.reshape(-1, flat.shape[-1]))
    return flat.view(np.dtype((np.void, flat.shape[1]))).ravel()


def _slice_raw(lay: Layout, arr: np.ndarray) -> bytes:
    return _pack_rows(lay.slices(arr)[None])[0].tobytes()


@dataclass
class Stratification:
    """All realizable palettes of one mode with their ranks and composition table.

    ``table[i, j]`` is the index of ``palettes[i] (+) palettes[j]`` and
    ``unary[i]`` the index of the unary extension of ``palettes[i]`` (subcubic
    modes only).  Indices are assigned by rank, then by bitset key.
    """

    mode: Mode
    palettes: list[Palette]
    ranks: np.ndarray
    table: np.ndarray
    unary: np.ndarray | None
    index: dict[bytes, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {p.raw: i for i, p in enumerate(self.palettes)}

    def __len__(self) -> int:
        return len(self.palettes)

    @property
    def max_rank(self) -> int:
        return int(self.ranks.max())

    @property
    def strata(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.max_rank + 1)]
        for i, r in enumerate(self.ranks):
            out[r].append(i)
        return out

    def index_of(self, p: Palette) -> int:
        try:
            return self.index[p.raw]
        except KeyError:
            raise KeyError("palette is not realizable in this mode") from None

    def __contains__(self, p: Palette) -> bool:
        return p.raw in self.index

    def rank_of(self, p: Palette) -> int:
        return int(self.ranks[self.index_of(p)])


def compute_closure(mode: Mode | str, chunk: int = 32,
                    progress: Callable[[str], None] | None = None) -> Stratification:
    """Enumerate realizable palettes stratum by stratum until stable.

    The layered recurrence runs until ``EMPTY_STRATA_TO_STOP`` consecutive
    strata come out empty; then a pass over all ordered pairs (plus all unary
    extensions) must add nothing, otherwise layering resumes.
    """
    mode = Mode.parse(mode)
    lay = layout(mode)
    comp = _SliceComposer(lay)
    say = progress or (lambda msg: log.info(msg))

    p0 = palette_of_trivial(mode)
    palettes = [p0]
    arrays = [p0.array]
    known = {_slice_raw(lay, p0.array): 0}
    strata: list[list[int]] = [[0]]
    right_cache: dict[int, np.ndarray] = {}

    def right_of(k: int) -> np.ndarray:
        if k not in right_cache:
            right_cache[k] = comp.right(np.stack([arrays[i] for i in strata[k]]))
        return right_cache[k]

    def layer() -> list[int]:
        k = len(strata)
        cand: dict[bytes, tuple] = {}
        for i in range(k):
            j = k - 1 - i
            if not strata[i] or not strata[j]:
                continue
            lefts, rights = strata[i], strata[j]
            for start in range(0, len(lefts), chunk):
                block = lefts[start:start + chunk]
                res = comp.slices(comp.left(np.stack([arrays[a] for a in block])), right_of(j))
                rows = _pack_rows(res)
                uniq, first = np.unique(rows, return_index=True)
                for row, pos in sorted(zip(uniq, first), key=lambda t: t[1]):
                    raw = row.tobytes()
                    if raw not in known and raw not in cand:
                        a, b = divmod(int(pos), len(rights))
                        cand[raw] = ("binary", block[a], rights[b])
        if not mode.is_cubic:
            for a in strata[k - 1]:
                arr = unary_arrays(lay, arrays[a])
                raw = _slice_raw(lay, arr)
                if raw not in known and raw not in cand:
                    cand[raw] = ("unary", a)
        new = []
        for raw, prod in cand.items():
            if prod[0] == "binary":
                arr = compose_arrays(lay, arrays[prod[1]], arrays[prod[2]])
            else:
                arr = unary_arrays(lay, arrays[prod[1]])
            if _slice_raw(lay, arr) != raw or not np.array_equal(lay.expand(lay.slices(arr)), arr):
                raise AssertionError("composition result is not color-symmetric")
            new.append(Palette(mode, arr))
        new.sort(key=lambda p: p.key)
        ids = []
        for p in new:
            ids.append(len(palettes))
            known[_slice_raw(lay, p.array)] = len(palettes)
            palettes.append(p)
            arrays.append(p.array)
        strata.append(ids)
        return ids

    while True:
        empties = 0
        while empties < EMPTY_STRATA_TO_STOP:
            ids = layer()
            say(f"{mode}: stratum {len(strata) - 1}: {len(ids)} new palettes "
                f"({len(palettes)} total)")
            empties = 0 if ids else empties + 1
        table, unary, escaped = _all_pairs(mode, lay, comp, arrays, known, chunk)
        if not escaped:
            break
        say(f"{mode}: all-pairs pass found {escaped} unseen results; resuming")

    ranks = np.zeros(len(palettes), dtype=np.int64)
    for r, ids in enumerate(strata):
        ranks[ids] = r
    return Stratification(mode, palettes, ranks, table, unary)


def _all_pairs(mode: Mode, lay: Layout, comp: _SliceComposer, arrays: list[np.ndarray],
               known: dict[bytes, int], chunk: int):
    n = len(arrays)
    stacked = np.stack(arrays)
    right = comp.right(stacked)
    table = np.full((n, n), -1, dtype=np.int32)
    escaped = set()
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        rows = _pack_rows(comp.slices(comp.left(stacked[start:stop]), right))
        uniq, inverse = np.unique(rows, return_inverse=True)
        ids = np.empty(len(uniq), dtype=np.int32)
        for u, row in enumerate(uniq):
            ids[u] = known.get(row.tobytes(), -1)
            if ids[u] < 0:
                escaped.add(row.tobytes())
        table[start:stop] = ids[inverse.ravel()].reshape(stop - start, n)
    unary = None
    if not mode.is_cubic:
        unary = np.empty(n, dtype=np.int32)
        for i, arr in enumerate(arrays):
            raw = _slice_raw(lay, unary_arrays(lay, arr))
            unary[i] = known.get(raw, -1)
            if unary[i] < 0:
                escaped.add(raw)
    return table, unary, len(escaped)


# ---------------------------------------------------------------------------
# Analyses
# ---------------------------------------------------------------------------

def incompletable_mask(s: Stratification) -> np.ndarray:
    return np.array([not p.has_completable() for p in s.palettes], dtype=bool)


def incompletable_palettes(s: Stratification) -> dict[int, list[int]]:
    """Indices of incompletable palettes, grouped by rank."""
    out: dict[int, list[int]] = {}
    for i in np.flatnonzero(incompletable_mask(s)):
        out.setdefault(int(s.ranks[i]), []).append(int(i))
    return out


def production_counts(s: Stratification, universe: str = "all") -> np.ndarray:
    """Number of productions per palette; ``universe`` is "all" or "binary"."""
    if universe not in ("all", "binary"):
        raise ValueError(f"unknown production universe {universe!r}")
    counts = np.bincount(s.table.ravel(), minlength=len(s))
    if universe == "all" and s.unary is not None:
        counts = counts + np.bincount(s.unary, minlength=len(s))
    return counts


def decompositions(s: Stratification, p: Palette | int, universe: str = "all") -> list[Production]:
    """Every production of ``p`` over the whole closure."""
    idx = p if isinstance(p, (int, np.integer)) else s.index_of(p)
    if not 0 <= idx < len(s):
        raise KeyError(f"palette index {idx} is not in the closure")
    out = [Production("binary", (int(i), int(j))) for i, j in np.argwhere(s.table == idx)]
    if universe == "all" and s.unary is not None:
        out += [Production("unary", (int(i),)) for i in np.flatnonzero(s.unary == idx)]
    return out


def ud_mask(s: Stratification, universe: str = "all") -> np.ndarray:
    """Exactly one production; the trivial palette (no productions) counts as UD."""
    ud = production_counts(s, universe) == 1
    ud[0] = True
    return ud


def uniquely_decomposable(s: Stratification, p: Palette | int, universe: str = "all") -> bool:
    idx = p if isinstance(p, (int, np.integer)) else s.index_of(p)
    return bool(ud_mask(s, universe)[idx])


def ur_mask(s: Stratification, universe: str = "all") -> np.ndarray:
    """Unique realizability: the trivial palette, or UD into UR factors."""
    ud = ud_mask(s, universe)
    ur = np.zeros(len(s), dtype=bool)
    ur[0] = True
    unique_prod: dict[int, tuple[int, ...]] = {}
    for i, j in np.argwhere(ud[s.table]):
        unique_prod[int(s.table[i, j])] = (int(i), int(j))
    if universe == "all" and s.unary is not None:
        for i in np.flatnonzero(ud[s.unary]):
            unique_prod[int(s.unary[i])] = (int(i),)
    for idx in np.argsort(s.ranks, kind="stable"):
        if idx == 0 or not ud[idx]:
            continue
        ur[idx] = all(ur[f] for f in unique_prod[int(idx)])
    return ur


def uniquely_realizable(s: Stratification, p: Palette | int, universe: str = "all") -> bool:
    idx = p if isinstance(p, (int, np.integer)) else s.index_of(p)
    return bool(ur_mask(s, universe)[idx])


def _minimal_factors(s: Stratification) -> list[tuple[int, ...] | None]:
    """The smallest lower-rank factor tuple of every palette, computed once per closure."""
    cached = getattr(s, "_minimal", None)
    if cached is not None:
        return cached
    n = len(s)
    r = s.ranks.astype(np.int64)
    target = s.table.ravel()
    tight = (r[:, None] + r[None, :] + 1).ravel() == r[target]
    # row-major order makes the first tight cell per target the smallest (i, j)
    cells = np.flatnonzero(tight)
    first = np.full(n, -1, dtype=np.int64)
    hit, pos = np.unique(target[cells], return_index=True)
    first[hit] = cells[pos]
    out: list[tuple[int, ...] | None] = [None] * n
    for k in np.flatnonzero(first >= 0):
        out[k] = divmod(int(first[k]), n)
    if s.unary is not None:
        for i in range(n - 1, -1, -1):
            k = int(s.unary[i])
            if r[i] + 1 == r[k] and (out[k] is None or (i,) < out[k]):
                out[k] = (i,)
    out[0] = None
    s._minimal = out
    return out


def minimal_production(s: Stratification, idx: int) -> Production | None:
    """A production whose factors all have lower rank, preferring small indices."""
    f = _minimal_factors(s)[idx]
    if f is None:
        return None
    return Production("binary" if len(f) == 2 else "unary", f)


def witness_tripole(s: Stratification, idx: int):
    """A tripole of minimal rank realizing palette ``idx``."""
    from .model import Tripole

    memo: dict[int, Tripole] = {0: Tripole.trivial()}
    order = [idx]
    todo = [idx]
    while todo:
        k = todo.pop()
        prod = minimal_production(s, k)
        if prod is None:
            continue
        for f in prod.factors:
            if f not in memo and f not in order:
                order.append(f)
                todo.append(f)
    for k in sorted(order, key=lambda i: s.ranks[i]):
        if k not in memo:
            memo[k] = Tripole.join(*(memo[f] for f in minimal_production(s, k).factors))
    return memo[idx]


@dataclass
class TableRow:
    label: str
    total: int
    ud: int
    incompletable: int


def stratum_table(s: Stratification, universe: str = "all") -> list[TableRow]:
    inc = incompletable_mask(s)
    ud = ud_mask(s, universe)
    rows = []
    for r, ids in enumerate(s.strata):
        rows.append(TableRow(str(r), len(ids), int(ud[ids].sum()), int(inc[ids].sum())))
    rows.append(TableRow(f">={s.max_rank + 1}", 0, 0, 0))
    rows.append(TableRow("total", len(s), int(ud.sum()), int(inc.sum())))
    return rows


def report_table(s: Stratification, fmt: str = "text", universe: str = "all") -> str:
    rows = stratum_table(s, universe)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stratum", "all", "ud", "incompletable"])
        for row in rows:
            w.writerow([row.label, row.total, row.ud, row.incompletable])
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown table format {fmt!r}")
    lines = [f"mode: {s.mode}",
             f"{'stratum':>8} {'all':>6} {'UD':>6} {'incompl':>8}"]
    for row in rows:
        if row.label == "total":
            lines.append("-" * 31)
        lines.append(f"{row.label:>8} {row.total:>6} {row.ud:>6} {row.incompletable:>8}")
    return "\n".join(lines) + "\n"


def palette_records(s: Stratification, universe: str = "all") -> Iterable[dict]:
    """One JSON-ready record per palette (productions summarized by count)."""
    inc = incompletable_mask(s)
    counts = production_counts(s, universe)
    ud = ud_mask(s, universe)
    ur = ur_mask(s, universe)
    for i, p in enumerate(s.palettes):
        prod = minimal_production(s, i)
        yield {
            "index": i,
            "mode": s.mode.value,
            "key": p.hex_key,
            "rank": int(s.ranks[i]),
            "size": len(p),
            "incompletable": bool(inc[i]),
            "ud": bool(ud[i]),
            "ur": bool(ur[i]),
            "n_productions": int(counts[i]),
            "witness_production": prod.to_json() if prod else None,
        }


def production_records(s: Stratification, universe: str = "all") -> Iterable[dict]:
    by_target: list[list[Production]] = [[] for _ in range(len(s))]
    for i, j in np.ndindex(*s.table.shape):
        by_target[s.table[i, j]].append(Production("binary", (i, j)))
    if universe == "all" and s.unary is not None:
        for i, t in enumerate(s.unary):
            by_target[t].append(Production("unary", (i,)))
    for i, prods in enumerate(by_target):
        yield {"index": i, "productions": [p.to_json() for p in prods]}


# ---------------------------------------------------------------------------
# On-disk cache
# ---------------------------------------------------------------------------

def default_cache_dir() -> Path:
    env = os.environ.get("HALIN_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "halin"


def save_closure(s: Stratification, directory: Path | str) -> Path:
    lay = layout(s.mode)
    d = Path(directory) / s.mode.value
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "palettes.jsonl", "w") as fh:
        for i, p in enumerate(s.palettes):
            fh.write(json.dumps({"index": i, "rank": int(s.ranks[i]),
                                 "slices": _slice_raw(lay, p.array).hex()}) + "\n")
    np.save(d / "table.npy", s.table)
    if s.unary is not None:
        np.save(d / "unary.npy", s.unary)
    manifest = {"format_version": FORMAT_VERSION, "mode": s.mode.value, "size": len(s)}
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return d


def load_closure(directory: Path | str, mode: Mode | str) -> Stratification | None:
    """Load a cached closure, or None if absent or written by another format version."""
    mode = Mode.parse(mode)
    lay = layout(mode)
    d = Path(directory) / mode.value
    try:
        manifest = json.loads((d / "manifest.json").read_text())
    except (OSError, ValueError):
        return None
    if manifest.get("format_version") != FORMAT_VERSION or manifest.get("mode") != mode.value:
        return None
    palettes, ranks = [], []
    shape = (len(lay.orbit_reps), len(lay.tails), len(lay.tails))
    with open(d / "palettes.jsonl") as fh:
        for line in fh:
            rec = json.loads(line)
            bits = np.unpackbits(np.frombuffer(bytes.fromhex(rec["slices"]), dtype=np.uint8))
            slices = bits[:np.prod(shape)].reshape(shape).astype(bool)
            palettes.append(Palette(mode, lay.expand(slices)))
            ranks.append(rec["rank"])
    table = np.load(d / "table.npy")
    unary = np.load(d / "unary.npy") if not mode.is_cubic else None
    return Stratification(mode, palettes, np.array(ranks, dtype=np.int64), table, unary)


def get_closure(mode: Mode | str, cache_dir: Path | str | None = None,
                use_cache: bool = True) -> Stratification:
    """Closure for ``mode``, read from or written to the cache directory."""
    mode = Mode.parse(mode)
    directory = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    if use_cache:
        s = load_closure(directory, mode)
        if s is not None:
            return s
    s = compute_closure(mode)
    if use_cache:
        try:
            save_closure(s, directory)
        except OSError as exc:
            log.warning("could not write closure cache to %s: %s", directory, exc)
    return s
