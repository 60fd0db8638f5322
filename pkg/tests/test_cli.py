import io
import json
import subprocess
import sys

import pytest

from halin.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, main, parse_graph_input
from halin.model import HalinGraph, Multipole

PRISM = "(*,*,(*,*))"


def run(*argv, cache_dir=None):
    out = io.StringIO()
    args = list(argv)
    if cache_dir is not None:
        args += ["--cache-dir", str(cache_dir)]
    code = main(args, stdout=out)
    return code, out.getvalue()


@pytest.fixture
def graph_file(tmp_path):
    def make(text):
        p = tmp_path / "g.txt"
        p.write_text(text)
        return str(p)
    return make


def test_color_prism_json(graph_file):
    code, out = run("color", "--mode", "cubic-total", "--input", graph_file(PRISM), "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["graph"] == PRISM and doc["colorable"]


def test_color_k4_is_negative(graph_file):
    code, out = run("color", "--mode", "cubic-total", "--input", graph_file("(*,*,*)"))
    assert code == EXIT_NEGATIVE and "Type 2" in out


def test_color_dot(graph_file):
    code, out = run("color", "--mode", "subcubic-avd", "--input", graph_file(PRISM), "--format", "dot")
    assert code == EXIT_OK
    assert out.startswith("graph halin {") and out.count(" -- ") == 9


def test_color_is_deterministic():
    argv = ("color", "--mode", "subcubic-total", "--random-leaves", "40", "--subdivide", "0.2",
            "--seed", "9", "--format", "json")
    assert run(*argv) == run(*argv)
    # the common options are accepted before the subcommand too
    assert run("--seed", "9", *argv[:-2], "--format", "json") == run(*argv)


def test_verify_roundtrip(graph_file, tmp_path):
    coloring = tmp_path / "c.json"
    code, _ = run("color", "--mode", "cubic-total", "--input", graph_file(PRISM),
                  "--format", "json", "--out", str(coloring))
    assert code == EXIT_OK
    code, out = run("verify", "--mode", "cubic-total", "--input", graph_file(PRISM),
                    "--coloring", str(coloring))
    assert (code, out) == (EXIT_OK, "valid\n")
    doc = json.loads(coloring.read_text())
    doc["vertices"][1][1] = doc["vertices"][0][1]  # vertices 0 and 1 are adjacent
    coloring.write_text(json.dumps(doc))
    code, out = run("verify", "--mode", "cubic-total", "--input", graph_file(PRISM),
                    "--coloring", str(coloring))
    assert code == EXIT_NEGATIVE and out.startswith("invalid")


def test_verify_cross_check(graph_file):
    code, out = run("verify", "--mode", "subcubic-total", "--input", graph_file("(((*),*),*,*)"))
    assert code == EXIT_NEGATIVE and "consistent: True" in out
    code, out = run("verify", "--mode", "subcubic-avd", "--input", graph_file(PRISM))
    assert code == EXIT_OK and "consistent: True" in out


def test_search_json(cache_dir):
    code, out = run("search", "--mode", "cubic-total", "--max-leaves", "10", "--audit",
                    "--report", "json", cache_dir=cache_dir)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert [g["leaves"] for g in doc["type2"]] == [3, 6, 7, 10]
    assert doc["audit"]["search_agrees"]


def test_closure_csv(cache_dir, tmp_path):
    out_file = tmp_path / "p.jsonl"
    code, out = run("closure", "--mode", "cubic-total", "--table", "csv", "--out", str(out_file),
                    cache_dir=cache_dir)
    assert code == EXIT_OK
    assert out.splitlines()[-1] == "total,1214,748,22"
    assert len(out_file.read_text().splitlines()) == 1214


def test_analyze_palette(cache_dir):
    code, out = run("analyze-palette", "--mode", "cubic-total", "--tripole", "(*,*)",
                    "--report", "json", cache_dir=cache_dir)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["rank"] == 1 and doc["incompletable"] and doc["witness"] == "(*,*)"
    code, out = run("analyze-palette", "--mode", "cubic-total", "--index", "99999", cache_dir=cache_dir)
    assert code == EXIT_ERROR


def test_oracle_edge_list(graph_file):
    code, out = run("oracle", "--mode", "total", "--input", graph_file("0 1\n1 2\n2 0\n"))
    assert code == EXIT_OK
    code, _ = run("oracle", "--mode", "total", "--input", graph_file("(*,*,*)"))
    assert code == EXIT_NEGATIVE
    code, _ = run("oracle", "--mode", "snd", "--colors", "5", "--input", graph_file("(*,*,*)"))
    assert code == EXIT_OK


def test_snd_search():
    code, out = run("snd-search", "--max-rank", "3")
    assert code == EXIT_OK and "(*,(*))" in out
    assert run("snd-search", "--max-rank", "1")[0] == EXIT_NEGATIVE


@pytest.mark.parametrize("argv", [
    ["color", "--mode", "cubic-total", "--input", "/nonexistent/file"],
    ["color", "--mode", "bogus"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_one(argv):
    assert run(*argv)[0] == EXIT_ERROR


def test_parse_error_exit_one(graph_file):
    assert run("color", "--mode", "cubic-total", "--input", graph_file("(*,*"))[0] == EXIT_ERROR
    assert run("color", "--mode", "cubic-total", "--input", graph_file("((*,*),*)"))[0] == EXIT_ERROR


def test_parse_graph_input():
    assert isinstance(parse_graph_input(PRISM), HalinGraph)
    g = parse_graph_input("# triangle\n0 1\n1 2\n2 0\n")
    assert isinstance(g, Multipole) and g.n == 3


def test_module_entry_point(graph_file):
    proc = subprocess.run([sys.executable, "-m", "halin", "color", "--mode", "cubic-total",
                           "--input", graph_file("(*,*,*)")], capture_output=True, text=True)
    assert proc.returncode == EXIT_NEGATIVE
