"""Command-line front end.

Exit codes: 0 success (or colorable), 3 a negative result (Type 2, no
coloring, invalid coloring), 1 usage or data errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .algebra import Palette
from .closure import (
    decompositions,
    get_closure,
    incompletable_mask,
    palette_records,
    production_records,
    report_table,
    ud_mask,
    ur_mask,
    witness_tripole,
)
from .dp import NotColorable, decide, extract_coloring, palette_dp, validate_coloring
from .model import (
    Coloring,
    HalinGraph,
    Mode,
    Multipole,
    TreeFormatError,
    edge_key,
    parse_halin,
    parse_tree,
    parse_tripole,
)
from .oracle import as_multipole, brute_avd, brute_snd, brute_total
from .search import bad_tripole_audit, find_type2, random_halin, snd_search

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 3

log = logging.getLogger("halin")

DOT_COLORS = ("red", "blue", "darkgreen", "orange", "purple", "brown", "gray", "black")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _read_text(path: str | None) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _emit(text: str, out: str | None, stdout: TextIO) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)


def _write_jsonl(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

def coloring_text(h_or_g, col: Coloring) -> str:
    lines = []
    if col.vertex_colors is not None:
        for v in sorted(col.vertex_colors):
            lines.append(f"vertex {v}: {col.vertex_colors[v]}")
    for (u, v) in sorted(col.edge_colors):
        lines.append(f"edge {u}-{v}: {col.edge_colors[(u, v)]}")
    return "\n".join(lines) + "\n"


def coloring_dot(g: Multipole, col: Coloring | None, name: str = "halin") -> str:
    """Graphviz source with colors as labels and pen colors."""
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    for v in range(g.n):
        attrs = [f'label="{v}"']
        if col is not None and col.vertex_colors is not None:
            c = col.vertex_colors[v]
            attrs = [f'label="{v}:{c}"', f"color={DOT_COLORS[c % len(DOT_COLORS)]}"]
        lines.append(f"  n{v} [{', '.join(attrs)}];")
    for u, v in g.edges:
        attrs = []
        if col is not None:
            c = col.edge_colors[edge_key(u, v)]
            attrs = [f'label="{c}"', f"color={DOT_COLORS[c % len(DOT_COLORS)]}"]
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  n{u} -- n{v}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _coloring_json(mode: str, graph: str, col: Coloring | None) -> str:
    doc = {"mode": mode, "graph": graph, "colorable": col is not None}
    if col is not None:
        doc.update(col.to_json())
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _load_coloring(path: str) -> Coloring:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    edges = {edge_key(int(u), int(v)): int(c) for u, v, c in doc["edges"]}
    verts = doc.get("vertices")
    if verts is not None:
        verts = {int(v): int(c) for v, c in verts}
    return Coloring(edges, verts)


def parse_graph_input(text: str) -> HalinGraph | Multipole:
    """Tree text, or an edge list with one ``u v`` pair per line (``#`` comments)."""
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines()).strip()
    if body.startswith(("(", "*")):
        return HalinGraph(parse_tree(body).children)
    edges = []
    for lineno, line in enumerate(body.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise UsageError(f"edge list line {lineno}: expected two vertex ids")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise UsageError(f"edge list line {lineno}: vertex ids must be integers") from None
        if u == v or u < 0 or v < 0:
            raise UsageError(f"edge list line {lineno}: bad edge {u} {v}")
        edges.append(edge_key(u, v))
    if not edges:
        raise UsageError("empty graph input")
    if len(set(edges)) != len(edges):
        raise UsageError("edge list has repeated edges")
    n = max(max(e) for e in edges) + 1
    return Multipole(n, tuple(edges), ())


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_closure(args, stdout: TextIO) -> int:
    s = get_closure(args.mode, args.cache_dir, use_cache=not args.no_cache)
    stdout.write(report_table(s, args.table, args.universe))
    if args.out:
        _write_jsonl(args.out, palette_records(s, args.universe))
    if args.productions:
        _write_jsonl(args.productions, production_records(s, args.universe))
    return EXIT_OK


def _graph_from_args(args, mode: Mode) -> HalinGraph:
    if args.random_leaves is not None:
        return random_halin(mode, args.random_leaves, args.seed, args.subdivide)
    return parse_halin(_read_text(args.input).strip(), mode)


def cmd_color(args, stdout: TextIO) -> int:
    mode = Mode.parse(args.mode)
    h = _graph_from_args(args, mode)
    try:
        col = extract_coloring(mode, h)
    except NotColorable:
        col = None
    if args.format == "json":
        text = _coloring_json(mode.value, str(h), col)
    elif args.format == "dot":
        text = coloring_dot(h.to_multipole(), col)
    else:
        text = (f"{h}: {mode} 4-colorable\n" + coloring_text(h, col)) if col else \
            f"{h}: no {mode} 4-coloring (Type 2)\n"
    _emit(text, args.out, stdout)
    return EXIT_OK if col is not None else EXIT_NEGATIVE


def cmd_verify(args, stdout: TextIO) -> int:
    mode = Mode.parse(args.mode)
    h = _graph_from_args(args, mode)
    if args.coloring:
        ok, problems = validate_coloring(mode, h, _load_coloring(args.coloring))
        stdout.write("valid\n" if ok else "invalid\n" + "".join(f"  {p}\n" for p in problems))
        return EXIT_OK if ok else EXIT_NEGATIVE
    verdicts = {v: decide(mode, h, v) for v in h.leaves}
    dp_answer = verdicts[h.leaves[0]]
    brute = (brute_avd if mode.is_avd else brute_total)(h)
    consistent = len(set(verdicts.values())) == 1 and dp_answer == (brute is not None)
    lines = [f"graph: {h}", f"mode: {mode}",
             f"dp: {'colorable' if dp_answer else 'Type 2'} "
             f"(same for all {len(verdicts)} peripheral vertices: {len(set(verdicts.values())) == 1})",
             f"oracle: {'colorable' if brute is not None else 'Type 2'}"]
    if dp_answer:
        ok, problems = validate_coloring(mode, h, extract_coloring(mode, h))
        lines.append(f"extracted coloring valid: {ok}")
        lines += [f"  {p}" for p in problems]
        consistent = consistent and ok
    lines.append(f"consistent: {consistent}")
    stdout.write("\n".join(lines) + "\n")
    if not consistent:
        return EXIT_ERROR
    return EXIT_OK if dp_answer else EXIT_NEGATIVE


def cmd_search(args, stdout: TextIO) -> int:
    mode = Mode.parse(args.mode)
    max_leaves = args.max_leaves if args.max_leaves is not None else (12 if mode.is_cubic else 10)
    closure = None if args.method == "explicit" else get_closure(mode, args.cache_dir)
    result = find_type2(mode, max_leaves, args.max_spanning, closure=closure, method=args.method)
    audit = bad_tripole_audit(result, closure) if args.audit else None
    if args.report == "json":
        doc = result.to_json()
        if audit is not None:
            doc["audit"] = audit.to_json()
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        text = result.to_text() + "\n" + (audit.to_text() + "\n" if audit else "")
    _emit(text, args.out, stdout)
    return EXIT_OK


def cmd_oracle(args, stdout: TextIO) -> int:
    g = parse_graph_input(_read_text(args.input))
    colorer = {"total": brute_total, "avd": brute_avd, "snd": brute_snd}[args.mode]
    col = colorer(as_multipole(g), args.colors)
    if col is None:
        stdout.write(f"no {args.mode} {args.colors}-coloring exists\n")
        return EXIT_NEGATIVE
    if args.format == "json":
        stdout.write(json.dumps(col.to_json(), indent=2, sort_keys=True) + "\n")
    else:
        stdout.write(f"{args.mode} {args.colors}-coloring found\n" + coloring_text(g, col))
    return EXIT_OK


def analyze_palette(mode: Mode, key: str | None = None, tripole: str | None = None,
                    index: int | None = None, universe: str = "all", cache_dir=None) -> dict:
    s = get_closure(mode, cache_dir)
    if index is not None:
        if not 0 <= index < len(s):
            raise UsageError(f"palette index {index} out of range 0..{len(s) - 1}")
        idx = index
    else:
        p = Palette.from_key(mode, key) if key is not None else palette_dp(mode, parse_tripole(tripole, mode))
        if p not in s:
            raise UsageError("palette is not realizable in this mode")
        idx = s.index_of(p)
    p = s.palettes[idx]
    prods = decompositions(s, idx, universe)
    return {
        "index": idx,
        "mode": mode.value,
        "key": p.hex_key,
        "rank": int(s.ranks[idx]),
        "size": len(p),
        "incompletable": bool(incompletable_mask(s)[idx]),
        "ud": bool(ud_mask(s, universe)[idx]),
        "ur": bool(ur_mask(s, universe)[idx]),
        "productions": [{**pr.to_json(), "ranks": [int(s.ranks[f]) for f in pr.factors]}
                        for pr in prods],
        "witness": str(witness_tripole(s, idx)),
    }


def cmd_analyze(args, stdout: TextIO) -> int:
    mode = Mode.parse(args.mode)
    rep = analyze_palette(mode, args.key, args.tripole, args.index, args.universe, args.cache_dir)
    if args.report == "json":
        stdout.write(json.dumps(rep, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    lines = [f"palette {rep['index']} ({rep['mode']})",
             f"  rank {rep['rank']}, size {rep['size']}",
             f"  incompletable {rep['incompletable']}, UD {rep['ud']}, UR {rep['ur']}",
             f"  witness {rep['witness']}",
             f"  productions ({len(rep['productions'])}):"]
    for pr in rep["productions"]:
        factors = [pr["left"], pr["right"]] if pr["kind"] == "binary" else [pr["child"]]
        lines.append(f"    {pr['kind']} {factors} ranks {pr['ranks']}")
    lines.append(f"  key {rep['key']}")
    stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_snd_search(args, stdout: TextIO) -> int:
    for t in snd_search(args.max_rank, args.colors):
        stdout.write(f"empty SND-{args.colors} palette: {t} (rank {t.rank}, {len(t.leaves)} leaves)\n")
        return EXIT_OK
    stdout.write(f"no tripole of rank <= {args.max_rank} has an empty SND-{args.colors} palette\n")
    return EXIT_NEGATIVE


# ---------------------------------------------------------------------------

def _common_options(p: argparse.ArgumentParser, default) -> None:
    # accepted before or after the subcommand
    p.add_argument("--seed", type=int, default=default, help="seed for randomly generated inputs")
    p.add_argument("--cache-dir", default=default,
                   help="closure cache directory (default: $HALIN_CACHE_DIR or ~/.cache/halin)")
    p.add_argument("-v", "--verbose", action="store_true", default=default)


def build_parser() -> argparse.ArgumentParser:
    modes = [m.value for m in Mode]
    p = _Parser(prog="halin", description="Total and AVD 4-coloring of (sub)cubic Halin graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common_options(p, argparse.SUPPRESS)
    p.set_defaults(seed=0, cache_dir=None, verbose=False)
    common = argparse.ArgumentParser(add_help=False)
    _common_options(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("closure", parents=[common], help="compute the realizable palettes and their stratification")
    c.add_argument("--mode", choices=modes, required=True)
    c.add_argument("--out", help="write one JSON record per palette")
    c.add_argument("--table", choices=["text", "csv"], default="text")
    c.add_argument("--productions", help="write every production of every palette (JSONL)")
    c.add_argument("--universe", choices=["all", "binary"], default="all",
                   help="productions counted for uniqueness")
    c.add_argument("--no-cache", action="store_true")
    c.set_defaults(func=cmd_closure)

    for name, func, help_ in (("color", cmd_color, "4-color a Halin graph"),
                              ("verify", cmd_verify, "cross-check a graph or validate a coloring")):
        c = sub.add_parser(name, parents=[common], help=help_)
        c.add_argument("--mode", choices=modes, required=True)
        c.add_argument("--input", default="-", help="file with the tree text, or - for stdin")
        c.add_argument("--random-leaves", type=int, metavar="N",
                       help="use a random Halin graph with N leaves instead of --input")
        c.add_argument("--subdivide", type=float, default=0.0,
                       help="degree-2 vertex probability per edge for random subcubic graphs")
        if name == "color":
            c.add_argument("--format", choices=["json", "text", "dot"], default="text")
            c.add_argument("--out")
        else:
            c.add_argument("--coloring", help="JSON coloring to validate")
        c.set_defaults(func=func)

    c = sub.add_parser("search", parents=[common], help="find all Type-2 Halin graphs within a bound")
    c.add_argument("--mode", choices=modes, required=True)
    c.add_argument("--max-leaves", type=int)
    c.add_argument("--max-spanning", type=int)
    c.add_argument("--method", choices=["closure", "explicit"], default="closure")
    c.add_argument("--report", choices=["text", "json"], default="text")
    c.add_argument("--audit", action="store_true", help="relate Type-2 graphs to incompletable palettes")
    c.add_argument("--out")
    c.set_defaults(func=cmd_search)

    c = sub.add_parser("oracle", parents=[common], help="brute-force coloring of an arbitrary subcubic graph")
    c.add_argument("--mode", choices=["total", "avd", "snd"], required=True)
    c.add_argument("--colors", type=int, default=4)
    c.add_argument("--input", default="-", help="tree text or edge list file, or - for stdin")
    c.add_argument("--format", choices=["json", "text"], default="text")
    c.set_defaults(func=cmd_oracle)

    c = sub.add_parser("analyze-palette", parents=[common], help="rank, flags, productions and witness of a palette")
    c.add_argument("--mode", choices=modes, required=True)
    which = c.add_mutually_exclusive_group(required=True)
    which.add_argument("--key", help="hex bitset key")
    which.add_argument("--tripole", help="tripole text")
    which.add_argument("--index", type=int, help="closure index")
    c.add_argument("--universe", choices=["all", "binary"], default="all")
    c.add_argument("--report", choices=["text", "json"], default="text")
    c.set_defaults(func=cmd_analyze)

    c = sub.add_parser("snd-search", parents=[common], help="first subcubic tripole with an empty SND palette")
    c.add_argument("--max-rank", type=int, default=6)
    c.add_argument("--colors", type=int, default=4)
    c.set_defaults(func=cmd_snd_search)
    return p


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, stdout)
    except (TreeFormatError, UsageError, ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"halin {args.command}: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
