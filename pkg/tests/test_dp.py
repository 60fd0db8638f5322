import itertools
import random

import pytest

from halin.algebra import palette_compose, palette_of_trivial, palette_unary
from halin.dp import (
    NotColorable,
    decide,
    engine,
    extract_coloring,
    palette_dp,
    palette_table,
    validate_coloring,
)
from halin.model import (
    Coloring,
    Mode,
    Tripole,
    TreeFormatError,
    decompose,
    edge_key,
    parse_halin,
    parse_tripole,
)
from halin.search import enum_halin, random_halin, random_tripole

CT, ST, AVD = Mode.CUBIC_TOTAL, Mode.SUBCUBIC_TOTAL, Mode.SUBCUBIC_AVD
K4 = "(*,*,*)"
PRISM = "(*,*,(*,*))"


def test_palette_dp_base_cases():
    for mode in Mode:
        p0 = palette_of_trivial(mode)
        assert palette_dp(mode, parse_tripole("*")) == p0
        assert palette_dp(mode, parse_tripole("(*,*)")) == palette_compose(p0, p0)


def test_palette_dp_matches_recursive_definition():
    def rec(t: Tripole):
        parts = [rec(p) for p in decompose(t)]
        if not parts:
            return palette_of_trivial(ST)
        return palette_compose(*parts) if len(parts) == 2 else palette_unary(parts[0])

    for seed in range(20):
        t = random_tripole(8, seed, 0.3)
        assert palette_dp(ST, t) == rec(t)


def test_memo_table_covers_every_node():
    t = random_tripole(30, 3, 0.2)
    table = palette_table(ST, t)
    for u in range(t.n_nodes):
        assert table[u] == palette_dp(ST, t.subtripole(u))


def test_cubic_mode_rejects_unary_node():
    with pytest.raises(TreeFormatError):
        palette_dp(CT, Tripole(((1,), ())))
    with pytest.raises(ValueError):
        engine(CT).unary(engine(CT).trivial)


def test_decide_examples():
    assert decide(CT, parse_halin(K4)) is False
    assert decide(CT, parse_halin(PRISM)) is True
    assert decide(AVD, parse_halin(K4)) is False


@pytest.mark.parametrize("mode", list(Mode))
def test_decide_independent_of_vertex_and_reflection(mode):
    for h in enum_halin(mode, 7, 6):
        answers = {decide(mode, g, v) for g in (h, h.mirror()) for v in g.leaves}
        assert len(answers) == 1, str(h)


def test_extract_prism():
    h = parse_halin(PRISM)
    col = extract_coloring(CT, h)
    ok, problems = validate_coloring(CT, h, col)
    assert ok, problems
    assert len(col.edge_colors) == 9 and len(col.vertex_colors) == 6


def test_extract_is_deterministic():
    h = random_halin(ST, 60, 11, 0.2)
    assert extract_coloring(ST, h).to_json() == extract_coloring(ST, h).to_json()


def test_extract_rejects_type2():
    with pytest.raises(NotColorable):
        extract_coloring(CT, parse_halin(K4))


def test_validator_rejects_every_k4_assignment():
    h = parse_halin(K4)
    g = h.to_multipole()
    edges = list(g.edges)
    # every edge coloring, with the vertices given a fixed proper coloring
    for colors in itertools.product(range(4), repeat=len(edges)):
        col = Coloring(dict(zip((edge_key(*e) for e in edges), colors)), {0: 0, 1: 1, 2: 2, 3: 3})
        assert not validate_coloring(CT, h, col)[0]
        assert not validate_coloring(AVD, h, Coloring(col.edge_colors))[0]


def test_validator_reports_missing_and_out_of_range():
    h = parse_halin(PRISM)
    ok, problems = validate_coloring(CT, h, Coloring({}, {}))
    assert not ok and any("no color" in p for p in problems)
    col = extract_coloring(CT, h)
    bad = Coloring(dict(col.edge_colors), dict(col.vertex_colors))
    bad.vertex_colors[0] = 7
    ok, problems = validate_coloring(CT, h, bad)
    assert not ok and any("outside" in p for p in problems)


def test_avd_validation_ignores_vertex_colors():
    h = parse_halin(PRISM)
    col = extract_coloring(AVD, h)
    assert col.vertex_colors is None
    with_junk = Coloring(col.edge_colors, {v: 0 for v in range(h.n_nodes)})
    assert validate_coloring(AVD, h, with_junk)[0]


@pytest.mark.slow
@pytest.mark.parametrize("mode", list(Mode))
def test_random_extractions_validate(mode):
    rng = random.Random(f"extract-{mode.value}")
    colorable = 0
    for _ in range(10_000):
        n = rng.randint(3, 200)
        h = random_halin(mode, n, rng, 0.0 if mode.is_cubic else rng.choice([0.0, 0.1, 0.4]))
        if not decide(mode, h):
            continue
        colorable += 1
        ok, problems = validate_coloring(mode, h, extract_coloring(mode, h))
        assert ok, (str(h), problems[:3])
    assert colorable > 9_000
