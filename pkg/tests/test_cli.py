import json

import pytest

from ecsim.cli import main
from ecsim.runner import ALGORITHMS, CSV_HEADER, RunReport, run_cell

FIELDS = ["algorithm", "n", "m", "delta", "bar_delta", "eps", "rounds", "oracle_rounds", "colors_used", "max_defect",
          "max_message_bits", "seed", "beta_used", "fallback_triggered", "ok"]


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (a, b):
        assert main(["gen", "--model", "regular_bipartite", "--n", "16", "--delta", "3", "--seed", "1", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_cong_gen_end_to_end(tmp_path):
    g = tmp_path / "g.txt"
    main(["gen", "--n", "200", "--delta", "10", "--seed", "3", "--out", str(g)])
    r = tmp_path / "r.json"
    col = tmp_path / "c.txt"
    code = main(["run", "--alg", "cong-gen", "--eps", "0.5", "--mode", "congest:64", "--graph", str(g),
                 "--out", str(r), "--coloring-out", str(col)])
    rep = json.loads(r.read_text())
    assert code == 0 and rep["ok"] is True and list(rep) == FIELDS
    assert main(["verify", "--graph", str(g), "--coloring", str(col)]) == 0


def test_verify_conflict_exits_one(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("3 2\n0 1\n1 2\n")
    c = tmp_path / "c.txt"
    c.write_text("0 1\n1 1\n")
    assert main(["verify", "--graph", str(g), "--coloring", str(c)]) == 1
    assert '"conflict"' in capsys.readouterr().out


def test_usage_errors_exit_two(tmp_path):
    assert main(["run", "--alg", "nope"]) == 2
    assert main(["run", "--alg", "token"]) == 2
    assert main(["frobnicate"]) == 2
    bad = tmp_path / "g.txt"
    bad.write_text("2 1\n0 0\n")
    assert main(["run", "--alg", "cong-gen", "--graph", str(bad)]) == 2
    assert main(["run", "--alg", "cong-bip", "--n", "20", "--delta", "3", "--eps", "2"]) == 2


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("# defaults\nalg = cong-bip\nn = 40\ndelta = 4\neps = 1/4\n")
    assert main(["--config", str(cfg), "run"]) == 0
    assert json.loads(capsys.readouterr().out)["eps"] == 0.25
    assert main(["--config", str(cfg), "run", "--eps", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["eps"] == 1.0
    cfg.write_text("colour = 3\n")
    assert main(["--config", str(cfg), "run", "--alg", "token"]) == 2


def test_token_file_input(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("2 1\n0 1\n")
    t = tmp_path / "t.txt"
    t.write_text("0 4 1\n1 0 1\n")
    assert main(["run", "--alg", "token", "--graph", str(g), "--tokens", str(t), "--k", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["rounds"] == 3 * 3 + 2


def test_lists_file_input(tmp_path):
    g, lists, out = tmp_path / "g.txt", tmp_path / "l.txt", tmp_path / "r.json"
    main(["gen", "--n", "120", "--delta", "12", "--seed", "2", "--out", str(g), "--lists-out", str(lists)])
    assert main(["run", "--alg", "list-d1", "--graph", str(g), "--lists", str(lists), "--out", str(out)]) == 0
    rep = RunReport.from_json(out.read_text())
    assert rep.ok and rep.oracle_rounds > 0


def test_sweep_and_report(tmp_path, capsys):
    out = tmp_path / "s.csv"
    args = ["sweep", "--algs", "token,cong-bip,cong-gen", "--deltas", "4,8", "--eps", "1/2,1", "--seeds", "2",
            "--out", str(out), "--reports-dir", str(tmp_path / "reps")]
    assert main(args) == 0
    first = out.read_bytes()
    lines = first.decode().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + 2 * 2 + 2 * 2 * 2 * 2
    assert main(args + ["--jobs", "2"]) == 0
    assert out.read_bytes() == first
    assert main(["report", str(out)]) == 0
    assert "cong-gen" in capsys.readouterr().out


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_reports_are_byte_identical(alg):
    cell = {"alg": alg, "delta": 8, "eps": "1/2", "seed": 5, "n": 64}
    a, b = run_cell(cell).to_json(), run_cell(dict(cell)).to_json()
    assert a == b and json.loads(a)["ok"]
