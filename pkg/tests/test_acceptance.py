"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (collected in the terminal summary) before
asserting, so a failing criterion still reports what was measured.
"""

import random
import sys
import time
import timeit

import numpy as np
import pytest

import conftest
from expected import (
    BAD_PALETTES,
    BAD_TRIPOLES,
    CUBIC_ALL,
    CUBIC_INC,
    CUBIC_TOTALS,
    CUBIC_TYPE2_LEAVES,
    CUBIC_TYPE2_SPANNING,
    CUBIC_UD,
    SUB_AVD_ALL,
    SUB_AVD_INC,
    SUB_AVD_TOTALS,
    SUB_AVD_UD,
    SUB_TOTAL_ALL,
    SUB_TOTAL_INC,
    SUB_TOTAL_TOTALS,
    SUB_TOTAL_UD,
)
from halin.closure import decompositions, incompletable_mask, stratum_table, ud_mask
from halin.dp import decide, extract_coloring, palette_dp, validate_coloring
from halin.model import Mode, tripole_of
from halin.oracle import brute_avd, brute_total, palette_brute, snd_tripole_empty
from halin.search import (
    bad_tripole_audit,
    enum_halin,
    find_type2,
    iter_tripoles,
    random_halin,
    snd_search,
)

CT, ST, AVD = Mode.CUBIC_TOTAL, Mode.SUBCUBIC_TOTAL, Mode.SUBCUBIC_AVD


def record(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def columns(s, universe="all"):
    rows = stratum_table(s, universe)
    per = {int(r.label): r for r in rows if r.label.isdigit()}
    top = max(per) if per else -1
    cols = tuple(tuple(getattr(per[k], f) if k in per else 0 for k in range(16))
                 for f in ("total", "ud", "incompletable"))
    beyond = sum(r.total for r in rows if r.label.startswith(">="))
    return cols, (rows[-1].total, rows[-1].ud, rows[-1].incompletable), beyond, top


def diff(name, got, want):
    bad = [f"{name}[{k}]={g} (expected {w})" for k, (g, w) in enumerate(zip(got, want)) if g != w]
    return bad


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_01_cubic_stratification(closures):
    s, dt = timed(lambda: closures(CT))
    (all_, ud, inc), totals, beyond, top = columns(s)
    problems = diff("all", all_, CUBIC_ALL) + diff("ud", ud, CUBIC_UD) + diff("inc", inc, CUBIC_INC)
    if totals != CUBIC_TOTALS:
        problems.append(f"totals {totals}")
    if beyond:
        problems.append(f"{beyond} palettes of rank >= 16")
    record(1, not problems,
           f"cubic-total strata 0..{top}, totals {totals}, nothing beyond 15 ({dt:.1f}s)"
           + ("; " + "; ".join(problems) if problems else ""))


def test_criterion_02_subcubic_stratification(closures):
    problems, notes = [], []
    t0 = time.perf_counter()
    for mode, want_all, want_ud, want_inc, want_totals in (
            (ST, SUB_TOTAL_ALL, SUB_TOTAL_UD, SUB_TOTAL_INC, SUB_TOTAL_TOTALS),
            (AVD, SUB_AVD_ALL, SUB_AVD_UD, SUB_AVD_INC, SUB_AVD_TOTALS)):
        s = closures(mode)
        (all_, ud, inc), totals, beyond, _ = columns(s)
        p = diff("all", all_, want_all) + diff("inc", inc, want_inc)
        ud_bad = diff("ud", ud, want_ud)
        if ud_bad:
            (_, ud_bin, _), _, _, _ = columns(s, "binary")
            bin_bad = diff("ud(binary)", ud_bin, want_ud)
            notes.append(f"{mode} UD differs under binary+unary: {', '.join(ud_bad)}")
            p += bin_bad
        if totals != want_totals:
            p.append(f"totals {totals} (expected {want_totals})")
        if beyond:
            p.append(f"{beyond} palettes of rank >= 16")
        problems += [f"{mode} {x}" for x in p]
        notes.append(f"{mode} totals {totals}")
    dt = time.perf_counter() - t0
    record(2, not problems, "; ".join(notes + problems) + f" ({dt:.1f}s)")


def test_criterion_03_no_composition_is_trivial(closures):
    s = closures(CT)
    hits = int((s.table == 0).sum())
    record(3, hits == 0 and s.table.shape == (1214, 1214),
           f"{s.table.shape[0]}x{s.table.shape[1]} ordered pairs, {hits} compose to the trivial palette")


def test_criterion_04_shared_incompletable_palettes(closures):
    s = closures(CT)
    inc = np.flatnonzero(incompletable_mask(s))
    ud = ud_mask(s)
    shared = [int(i) for i in inc if not ud[i]]
    ranks = sorted(int(s.ranks[i]) for i in shared)
    prods = {i: decompositions(s, i) for i in shared}
    two_each = all(len(p) == 2 for p in prods.values())
    low = [i for i in shared if s.ranks[i] == 5]
    trivial_factor = len(low) == 2 and all(0 in pr.factors for i in low for pr in prods[i])
    desc = "; ".join(f"palette {i} rank {s.ranks[i]}: {[pr.factors for pr in prods[i]]}" for i in shared)
    record(4, len(shared) == 3 and ranks == [5, 5, 8] and two_each and trivial_factor,
           f"{len(shared)} non-UD incompletable palettes ({desc})")


@pytest.fixture(scope="module")
def cubic_search(closures):
    return timed(lambda: find_type2(CT, 12, closure=closures(CT)))


def test_criterion_05_cubic_type2(cubic_search):
    res, dt = cubic_search
    leaves = sorted(len(h.leaves) for h in res.graphs)
    spanning = sorted(len(h.internal) for h in res.graphs)
    ok = (len(res.graphs) == 4 and set(leaves) == CUBIC_TYPE2_LEAVES
          and set(spanning) == CUBIC_TYPE2_SPANNING and dt < 600)
    record(5, ok, f"{len(res.graphs)} Type-2 graphs with <= 12 leaves, leaves {leaves}, "
                  f"spanning {spanning} ({dt:.2f}s)")


def test_criterion_06_bad_tripole_audit(cubic_search, closures):
    res, _ = cubic_search
    report = bad_tripole_audit(res, closures(CT))
    twice = [p for p, ts in report.shared.items() if len(ts) == 2]
    ok = (len(report.tripoles) == BAD_TRIPOLES and len(report.realized) == BAD_PALETTES
          and set(report.realized) == set(report.incompletable)
          and len(report.shared) == 3 and len(twice) == 3)
    record(6, ok, f"{len(report.tripoles)} tripoles realize {len(report.realized)} palettes "
                  f"(incompletable: {len(report.incompletable)}), {len(twice)} realized twice")


def test_criterion_07_subcubic_type2(cubic_search, closures):
    cubic = {str(h) for h in cubic_search[0].graphs}
    t0 = time.perf_counter()
    avd = find_type2(AVD, 10, closure=closures(AVD))
    tot = find_type2(ST, 10, closure=closures(ST))
    dt = time.perf_counter() - t0
    avd_set = {str(h) for h in avd.graphs}
    extra = [h for h in tot.graphs if str(h) not in cubic]
    ok = avd_set == cubic and cubic <= {str(h) for h in tot.graphs} and len(extra) == 1
    detail = f"AVD {len(avd_set)} graphs (= cubic: {avd_set == cubic}); total {len(tot.graphs)} graphs"
    if len(extra) == 1:
        s = closures(ST)
        h = extra[0]
        ts = [tripole_of(g, v) for g in (h, h.mirror()) for v in g.leaves]
        pals = {s.index_of(palette_dp(ST, t)) for t in ts}
        rank3_inc = [int(i) for i in np.flatnonzero(incompletable_mask(s)) if s.ranks[i] == 3]
        ok = ok and {t.rank for t in ts} == {3} and pals == set(rank3_inc)
        detail += (f", extra {h} with tripole ranks {sorted({t.rank for t in ts})} realizing "
                   f"{len(pals)} palettes = the {len(rank3_inc)} incompletable rank-3 palettes: "
                   f"{pals == set(rank3_inc)}")
    record(7, ok, detail + f" ({dt:.2f}s)")


@pytest.fixture(scope="module")
def small_graphs():
    # subcubic graphs need a bound on spanning vertices to be finite; cubic ones have at most leaves - 2
    return enum_halin(ST, 8, 8)


def test_criterion_08_dp_matches_oracle(small_graphs):
    checks = disagreements = bad_colorings = 0
    first = []
    for h in small_graphs:
        modes = (CT, ST, AVD) if h.is_cubic else (ST, AVD)
        for mode in modes:
            checks += 1
            truth = (brute_avd if mode.is_avd else brute_total)(h) is not None
            got = decide(mode, h)
            if got != truth:
                disagreements += 1
                first.append(f"{mode} {h}")
            if got:
                ok, _ = validate_coloring(mode, h, extract_coloring(mode, h))
                bad_colorings += not ok
    record(8, disagreements == 0 and bad_colorings == 0 and checks > 0,
           f"{len(small_graphs)} graphs with <= 8 leaves and <= 8 spanning vertices, {checks} "
           f"(graph, mode) checks, {disagreements} disagreements, {bad_colorings} invalid colorings"
           + (f"; e.g. {first[:3]}" if first else ""))


def test_criterion_09_algebra_matches_brute():
    counts, mismatches = {}, []
    for mode in Mode:
        ts = list(iter_tripoles(mode, 4))
        counts[mode.value] = len(ts)
        mismatches += [f"{mode} {t}" for t in ts if palette_dp(mode, t) != palette_brute(mode, t)]
    record(9, not mismatches, f"tripoles of rank <= 4 per mode {counts}, {len(mismatches)} mismatches"
           + (f"; e.g. {mismatches[:3]}" if mismatches else ""))


def test_criterion_10_cubic_avd_equals_total(small_graphs):
    fs = frozenset
    palette_bad = []
    ts = list(iter_tripoles(CT, 4))
    for t in ts:
        total = palette_brute(CT, t)
        avd = palette_brute(AVD, t)
        lifted = {(a, fs({b}), c, fs({d}), e, fs({f})) for a, b, c, d, e, f in total}
        if avd.members != lifted:
            palette_bad.append(str(t))
    cubic = [h for h in small_graphs if h.is_cubic]
    graph_bad = [str(h) for h in cubic if (brute_avd(h, 4) is None) != (brute_total(h, 4) is None)]
    record(10, not palette_bad and not graph_bad,
           f"{len(ts)} cubic tripoles of rank <= 4, {len(palette_bad)} palette differences; "
           f"{len(cubic)} cubic graphs with <= 8 leaves, {len(graph_bad)} AVD/total disagreements")


def test_criterion_11_linear_time():
    rng = random.Random(2024)
    sizes = (10**3, 10**4, 10**5)
    graphs = {n: random_halin(CT, n, rng) for n in sizes}
    for n in sizes:
        while not decide(CT, graphs[n]):
            graphs[n] = random_halin(CT, n, rng)
    extract_coloring(CT, graphs[10**3])  # warm the palette engine
    best = {}
    for n in sizes:
        col = extract_coloring(CT, graphs[n])
        assert validate_coloring(CT, graphs[n], col)[0]
        # timeit pauses the cyclic garbage collector, whose full passes scale with the live heap
        number = max(1, 10**4 // n)
        timer = timeit.Timer(lambda g=graphs[n]: extract_coloring(CT, g))
        best[n] = min(timer.repeat(repeat=5, number=number)) / number
    r1 = best[10**4] / best[10**3]
    r2 = best[10**5] / best[10**4]
    ok = all(5 <= r <= 20 for r in (r1, r2)) and best[10**5] < 10
    record(11, ok, "best times " + ", ".join(f"{n}: {t:.3f}s" for n, t in best.items())
           + f"; ratios {r1:.1f}, {r2:.1f} (linear within 2x: 5..20)")


def test_criterion_12_snd_empty_palette():
    t0 = time.perf_counter()
    found = next(snd_search(6), None)
    dt = time.perf_counter() - t0
    ok = found is not None and found.rank <= 6 and snd_tripole_empty(found) and dt < 600
    record(12, ok, f"first subcubic tripole with empty SND-4 palette: {found} "
                   f"(rank {found.rank if found else '-'}, {dt:.2f}s)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
