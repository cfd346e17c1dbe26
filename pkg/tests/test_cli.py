import json
import math

import networkx as nx
import numpy as np
import pytest

from conftest import from_nx
from gifw.bnb import is_isomorphism
from gifw.cli import main
from gifw.graph import Graph, read_graph, write_graph6
from gifw.results import RunRecord, shifted_geometric_mean, summarize
from oracles import brute_isomorphic, shifted_geomean_ref


def _write(path, g):
    path.write_text(write_graph6(g) + "\n")
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_solve_generated_pair(tmp_path, capsys, petersen):
    base = _write(tmp_path / "pet.g6", petersen)
    assert _run(capsys, ["gen", "--mode", "iso", "--base", base, "--seed", "7",
                         "--out", str(tmp_path / "p")])[0] == 0
    a, b = str(tmp_path / "p_A.g6"), str(tmp_path / "p_B.g6")
    code, out = _run(capsys, ["solve", a, b, "--trace", str(tmp_path / "t.jsonl")])
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "isomorphic"
    assert len(doc["permutation"]) == 10
    assert is_isomorphism(read_graph(a), read_graph(b), doc["permutation"])
    assert set(doc["stats"]) == {"nodes", "fw_iters", "wall_ms", "fixings_fraction",
                                 "obbt_iters_avg", "stage_times_ms"}
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert lines and all(set(json.loads(ln)) == {"id", "parent", "depth", "lb", "gap", "action"}
                         for ln in lines)


def test_solve_size_mismatch(tmp_path, capsys, k3, c6):
    code, out = _run(capsys, ["solve", _write(tmp_path / "k3.g6", k3), _write(tmp_path / "c6.g6", c6)])
    assert code == 1
    assert json.loads(out)["certificate"]["kind"] == "size_mismatch"


def test_solve_timeout(tmp_path, capsys):
    g = from_nx(nx.random_regular_graph(3, 60, seed=0))
    p = _write(tmp_path / "g.g6", g)
    code, out = _run(capsys, ["gen", "--base", p, "--seed", "1", "--out", str(tmp_path / "x")])
    code, out = _run(capsys, ["solve", str(tmp_path / "x_A.g6"), str(tmp_path / "x_B.g6"),
                              "--time-limit-ms", "1"])
    assert code == 2 and json.loads(out)["status"] == "inconclusive"


def test_error_exit_codes(tmp_path, capsys, k3):
    good = _write(tmp_path / "k3.g6", k3)
    assert main(["solve", str(tmp_path / "missing.g6"), good]) == 4
    (tmp_path / "bad.g6").write_text("B\n")
    assert main(["solve", str(tmp_path / "bad.g6"), good]) == 4
    with pytest.raises(SystemExit) as exc:
        main(["solve", good])
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        main(["solve", good, good, "--method", "nope"])
    assert exc.value.code == 3
    assert main(["solve", good, good, "--presolve", "degree,wl"]) == 3
    assert main(["gen", "--regular", "5", "3", "--out", str(tmp_path / "r")]) == 3


@pytest.mark.parametrize("method", ["boscia-dfs", "boscia-star", "boscia-clique-star",
                                    "boscia-obbt", "dc-fw"])
def test_every_method_runs(tmp_path, capsys, method):
    t = from_nx(nx.random_labeled_tree(9, seed=2))
    base = _write(tmp_path / "t.g6", t)
    _run(capsys, ["gen", "--base", base, "--seed", "3", "--out", str(tmp_path / "t")])
    code, out = _run(capsys, ["solve", str(tmp_path / "t_A.g6"), str(tmp_path / "t_B.g6"),
                              "--method", method, "--obbt-budget", "20"])
    doc = json.loads(out)
    assert doc["config_echo"]["method"] == method
    assert code == (0 if doc["status"] == "isomorphic" else 2)
    if method != "dc-fw":
        assert code == 0


def test_csv_format(tmp_path, capsys, petersen):
    p = _write(tmp_path / "p.g6", petersen)
    code, out = _run(capsys, ["solve", p, p, "--format", "csv"])
    header, row = out.strip().splitlines()
    assert header.split(",")[:6] == ["instance", "family", "n", "m", "method", "status"]
    assert ",isomorphic," in row and code == 0


def test_gen_identity_and_noniso(tmp_path, capsys):
    g = from_nx(nx.random_labeled_tree(7, seed=0))
    base = _write(tmp_path / "g.g6", g)
    _run(capsys, ["gen", "--base", base, "--no-permute", "--out", str(tmp_path / "same")])
    assert read_graph(tmp_path / "same_A.g6") == read_graph(tmp_path / "same_B.g6") == g
    for seed in range(5):
        _run(capsys, ["gen", "--mode", "noniso", "--flips", "2", "--base", base, "--seed", str(seed),
                      "--out", str(tmp_path / f"n{seed}")])
        meta = json.loads((tmp_path / f"n{seed}.json").read_text())
        assert len(meta["flips"]) == 2 and meta["expected"] == "non_isomorphic"
        A, B = read_graph(tmp_path / f"n{seed}_A.g6"), read_graph(tmp_path / f"n{seed}_B.g6")
        assert not brute_isomorphic(A.adj, B.adj)


def test_gen_regular(tmp_path, capsys):
    assert main(["gen", "--regular", "12", "3", "--seed", "4", "--out", str(tmp_path / "r")]) == 0
    capsys.readouterr()
    A = read_graph(tmp_path / "r_A.g6")
    assert A.n == 12 and set(A.degrees()) == {3}


def test_presolve_command(tmp_path, capsys, petersen, two_triangles, c6):
    p = _write(tmp_path / "p.g6", petersen)
    code, out = _run(capsys, ["presolve", p, p])
    assert json.loads(out)["fixings_fraction"] == 0.0 and code == 2
    code, out = _run(capsys, ["presolve", _write(tmp_path / "a.g6", two_triangles),
                              _write(tmp_path / "c.g6", c6)])
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "non_isomorphic" and doc["stage"] == "clique"
    star = from_nx(nx.star_graph(5))
    s = _write(tmp_path / "s.g6", star)
    doc = json.loads(_run(capsys, ["presolve", s, s])[1])
    assert doc["fixings_fraction"] > 0


def test_geomean_caption_example():
    assert shifted_geometric_mean([1.0, 3.0], 1.0) == pytest.approx(math.sqrt(8) - 1, rel=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(50):
        t = rng.exponential(5.0, size=int(rng.integers(1, 30)))
        assert shifted_geometric_mean(t, 1.0) == pytest.approx(shifted_geomean_ref(t, 1.0), rel=1e-12)


def test_summary_counts_timeouts_at_limit():
    recs = [RunRecord(f"i{k}", "fam", 10, 15, "m", "inconclusive", 5000.0) for k in range(3)]
    (row,) = summarize(recs, time_limit_ms=5000.0)
    assert row["time_s"] == pytest.approx(5.0) and row["solved"] == 0
    recs = [RunRecord("a", "f", 1, 0, "m", "isomorphic", 1000.0),
            RunRecord("b", "f", 1, 0, "m", "non_isomorphic", 3000.0),
            RunRecord("c", "f", 1, 0, "m", "inconclusive", 10.0)]
    (row,) = summarize(recs, time_limit_ms=10_000.0)
    assert row["solved"] == 2 and row["solved_pct"] == pytest.approx(200 / 3)
    assert row["time_s"] == pytest.approx(shifted_geomean_ref([1.0, 3.0, 10.0], 1.0), rel=1e-12)
    with pytest.raises(ValueError):
        RunRecord("x", "f", 1, 0, "m", "maybe", 1.0)


def test_bench(tmp_path, capsys, petersen):
    base = _write(tmp_path / "p.g6", petersen)
    inst = tmp_path / "inst"
    _run(capsys, ["gen", "--base", base, "--seed", "1", "--id", "b_iso", "--out", str(inst / "b_iso")])
    _run(capsys, ["gen", "--mode", "noniso", "--base", base, "--seed", "2", "--id", "a_non",
                  "--out", str(inst / "a_non")])
    code, out = _run(capsys, ["bench", str(inst), "--methods", "boscia-dfs,boscia-clique-star",
                              "--format", "json"])
    doc = json.loads(out)
    assert code == 0
    assert [r["instance"] for r in doc["records"]] == ["a_non", "a_non", "b_iso", "b_iso"]
    assert all(r["correct"] for r in doc["records"])
    assert sum(row["solved"] for row in doc["summary"]) == 4
