import json

import pytest

from pushpull.core import ConfigurationError
from pushpull.engine import EngineConfig
from pushpull.harness import load_config, main, parse_config, run_experiment, sweep_l


def test_empty_config_gives_defaults():
    exp = parse_config("")
    e = exp.engine
    assert (e.N, e.T, e.de_cr, e.de_f, e.delta, e.nr) == (300, 30, 1.0, 0.5, 0.9, 2)
    assert (e.Tc, e.alpha, e.tau, e.cp, e.l, e.max_evals) == (800, 0.95, 0.1, 2.0, 20, 300_000)
    assert exp.runs == 30
    assert exp.seeds == list(range(1, 31))
    assert exp.algorithms == ("pps", "cdp", "sr", "epsilon")


def test_override_and_comments():
    exp = parse_config("# header\npop = 100   # smaller\n\nproblems = deskcmop-block, deskcmop-eq\nepsilon_monotone = false\n")
    assert exp.engine.N == 100
    assert exp.engine.T == 30 and exp.engine.tau == 0.1
    assert exp.problems == ("deskcmop-block", "deskcmop-eq")
    assert exp.engine.epsilon_monotone is False


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("tau = 1.5", "tau"),
        ("pop = 100\nfoo = 3", "unknown key 'foo'"),
        ("T = 10\npop = ten", ":2:"),
        ("just words", ":1:"),
        ("problems = lir-cmop1", "unknown problem"),
        ("algorithms = pps, moead", "unknown algorithm"),
        ("runs = 0", "runs"),
    ],
)
def test_config_errors(text, fragment):
    with pytest.raises(ConfigurationError, match=fragment):
        parse_config(text)


def test_load_config_from_file(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("pop = 50\nT = 10\n", encoding="utf-8")
    assert load_config(path).engine.N == 50


TINY = "pop = 10\nT = 4\nevals = 300\nruns = 4\nn = 3\nproblems = deskcmop-block, deskcmop-boundary\nalgorithms = pps, cdp\n"


def test_experiment_layout_and_reproducibility(tmp_path):
    exp = parse_config(TINY)
    run_experiment(exp, tmp_path / "a", jobs=1)
    run_experiment(exp, tmp_path / "b", jobs=2)
    a_files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    b_files = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert a_files == b_files
    for rel in a_files:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    summaries = [p for p in a_files if p.name.endswith("summary.json")]
    assert len(summaries) == 2 * 2 * 4
    assert (tmp_path / "a" / "deskcmop-block" / "cdp" / "seed4_trace.csv").exists()
    for name in ("table_igd.csv", "table_hv.csv", "experiment.json"):
        assert (tmp_path / "a" / name).exists()
    meta = json.loads((tmp_path / "a" / "experiment.json").read_text())
    assert meta["paired_seeds"] is True and meta["seeds"] == [1, 2, 3, 4]


def test_paired_seeds_share_initial_population(tmp_path):
    exp = parse_config(TINY)
    run_experiment(exp, tmp_path, jobs=1)
    for seed in exp.seeds:
        traces = [
            (tmp_path / "deskcmop-boundary" / alg / f"seed{seed}_trace.csv").read_text().splitlines()[1]
            for alg in ("pps", "cdp")
        ]
        # generation 0 starts from the same population, so the same feasible ratio
        assert traces[0].split(",")[4] == traces[1].split(",")[4]


def test_sweep_l_rows():
    rows = sweep_l("deskcmop-block", [3, 6], EngineConfig(N=10, T=4, max_evals=300), seeds=[1, 2], n=3)
    assert [r["l"] for r in rows] == [3, 6]
    assert all(r["mean_igd"] > 0 and len(r["switch_generations"]) == 2 for r in rows)


def test_cli_run_writes_three_files(tmp_path, capsys):
    out = tmp_path / "results"
    code = main(["run", "--problem", "deskcmop-block", "--algorithm", "pps", "--seed", "1", "--evals", "400", "--pop", "20", "--n", "3", "--out", str(out)])
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["archive.csv", "summary.json", "trace.csv"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 1 and summary["evals"] == 400


def test_cli_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["run", "--problem", "nope", "--out", str(tmp_path)])
    assert err.value.code != 0
    with pytest.raises(SystemExit) as err:
        main(["run", "--problem", "deskcmop-block", "--algorithm", "moead", "--out", str(tmp_path)])
    assert err.value.code != 0


def test_cli_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = main(["run", "--problem", "deskcmop-block", "--evals", "40", "--pop", "20", "--n", "3", "--out", str(blocker / "sub")])
    assert code == 1
    assert "I/O error" in capsys.readouterr().err


def test_cli_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("tau = 1.5\n")
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "tau" in capsys.readouterr().err


def test_cli_list_problems(capsys):
    assert main(["list-problems"]) == 0
    names = [p["name"] for p in json.loads(capsys.readouterr().out)]
    assert "deskcmop-partial" in names


def test_cli_sweep_l(tmp_path, capsys):
    code = main(["sweep-l", "--values", "3,6", "--problem", "deskcmop-partial", "--runs", "2", "--evals", "300", "--pop", "10", "--n", "3", "--jobs", "1", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "sweep_l.csv").read_text().splitlines()
    assert lines[0] == "l,mean_igd,std_igd,mean_hv,std_hv"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["3", "6"]
