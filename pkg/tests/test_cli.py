"""CLI contract: exit codes, report envelopes, reproducibility."""

from __future__ import annotations

import json

from itersc.cli import EXIT_OK, EXIT_USAGE, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_johnson_vanish_report(capsys):
    code, out, err = run_cli(capsys, "johnson", "--op", "vanish", "--n", "4", "--m", "2")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["ok"] and report["command"] == "johnson"
    assert report["result"]["counterexamples"] == []
    assert "version" in report and "wall_time_s" in report
    assert "pass" in err


def test_johnson_partition_and_zeta(capsys):
    code, out, _ = run_cli(capsys, "johnson", "--op", "partition", "--n", "4",
                           "--set", "1,2;3,4")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["result"] == {"A": [1, 2], "B": [3, 4], "checked": True}

    code, out, _ = run_cli(capsys, "johnson", "--op", "zeta", "--n", "3",
                           "--m", "2", "--set", "1,2;2,3")
    assert json.loads(out)["result"]["vertices"] == [[1, 2, 3]]


def test_count_objects_consensus(capsys):
    code, out, _ = run_cli(capsys, "count-objects", "--protocol", "consensus",
                           "--n", "3")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["result"]["nu_total"] == 3 == rep["result"]["expected_total"]


def test_verify_consensus_small(capsys):
    code, out, _ = run_cli(capsys, "verify-consensus", "--n", "2")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["result"]["violations"] == 0


def test_verify_consensus_budget_guard(capsys):
    code, _, err = run_cli(capsys, "verify-consensus", "--n", "7",
                           "--mode", "exhaustive")
    assert code == EXIT_USAGE


def test_verify_2cc(capsys):
    code, out, _ = run_cli(capsys, "verify-2cc", "--g", "2")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["violations"] == 0


def test_transform_descriptor_and_check(capsys):
    code, out, _ = run_cli(capsys, "transform", "--direction", "wro2owr",
                           "--source", "wro-solo-d2", "--n", "3",
                           "--check", "20")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["result"]["source"]["model"] == "WRO"
    assert rep["result"]["simulation"]["model"] == "OWR"
    assert rep["result"]["correspondence"]["mismatches"] == 0


def test_connectivity_lower_bound(capsys):
    code, out, _ = run_cli(capsys, "connectivity", "--demo", "lower-bound",
                           "--automaton", "wor-solo-min", "--horizon", "2")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["result"]["valency"] == {"all-0": "0-valent", "all-1": "1-valent"}


def test_connectivity_wro_obstruction_single(capsys):
    code, out, _ = run_cli(capsys, "connectivity", "--demo", "wro-obstruction",
                           "--automaton", "wro-solo", "--horizon", "2")
    assert code == EXIT_OK


def test_simulate_trace(capsys, tmp_path):
    out_file = tmp_path / "trace.jsonl"
    code, _, err = run_cli(capsys, "simulate", "--protocol", "consensus",
                           "--n", "3", "--inputs", "0,1,1", "--seed", "5",
                           "--out", str(out_file))
    assert code == EXIT_OK
    lines = out_file.read_text().strip().split("\n")
    assert len(lines) == 3
    assert all("schedule" in json.loads(line) for line in lines)


def test_unknown_command_exits_2(capsys):
    assert main(["no-such-command"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_config_file_precedence(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 4, "m": 2, "op": "vanish"}))
    code, out, _ = run_cli(capsys, "johnson", "--config", str(cfg), "--op", "vanish")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["config"]["n"] == 4  # the config file supplied n

    # an explicit flag wins over the config file
    code, out, _ = run_cli(capsys, "johnson", "--config", str(cfg),
                           "--op", "vanish", "--n", "3")
    assert json.loads(out)["config"]["n"] == 3


def test_report_is_reproducible_from_config(capsys):
    _, out1, _ = run_cli(capsys, "johnson", "--op", "vanish", "--n", "4", "--m", "2")
    _, out2, _ = run_cli(capsys, "johnson", "--op", "vanish", "--n", "4", "--m", "2")
    r1, r2 = json.loads(out1), json.loads(out2)
    r1.pop("wall_time_s"), r2.pop("wall_time_s")
    assert r1 == r2
