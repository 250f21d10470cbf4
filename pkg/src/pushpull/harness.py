"""Command-line entry point, experiment configuration and multi-run orchestration.

Subcommands::

    run            one optimization, writes archive.csv, trace.csv, summary.json
    experiment     problems x algorithms x seeds from a config file, plus tables
    sweep-l        mean IGD/HV of the two-stage algorithm for several window lengths
    list-problems  JSON manifest of the registered problems

Config files are UTF-8 ``key = value`` lines; ``#`` starts a comment.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .core import ConfigurationError
from .engine import ALGORITHMS, EngineConfig, RunRecord, run
from .problems import REGISTRY, get_problem, problem_manifest
from .stats import build_comparison_table, summarize

DEFAULT_PROBLEMS = tuple(REGISTRY)
DEFAULT_ALGORITHMS = ("pps", "cdp", "sr", "epsilon")


def _int(text):
    return int(text)


def _float(text):
    return float(text)


def _names(text):
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _bool(text):
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# config key -> (parser, EngineConfig field or None for experiment-level keys)
CONFIG_KEYS = {
    "pop": (_int, "N"),
    "T": (_int, "T"),
    "CR": (_float, "de_cr"),
    "f": (_float, "de_f"),
    "delta": (_float, "delta"),
    "nr": (_int, "nr"),
    "Tc": (_int, "Tc"),
    "alpha": (_float, "alpha"),
    "tau": (_float, "tau"),
    "cp": (_float, "cp"),
    "l": (_int, "l"),
    "switch_threshold": (_float, "switch_threshold"),
    "evals": (_int, "max_evals"),
    "eta_m": (_float, "eta_m"),
    "pm": (_float, "pm"),
    "sr_pf": (_float, "sr_pf"),
    "theta": (_float, "theta"),
    "epsilon_monotone": (_bool, "epsilon_monotone"),
    "runs": (_int, None),
    "first_seed": (_int, None),
    "n": (_int, None),
    "problems": (_names, None),
    "algorithms": (_names, None),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Engine parameters plus the experiment matrix."""

    engine: EngineConfig = field(default_factory=EngineConfig)
    runs: int = 30
    first_seed: int = 1
    n: int | None = None  # decision variables; None keeps each problem's default
    problems: tuple[str, ...] = DEFAULT_PROBLEMS
    algorithms: tuple[str, ...] = DEFAULT_ALGORITHMS

    @property
    def seeds(self) -> list[int]:
        return list(range(self.first_seed, self.first_seed + self.runs))


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse ``key = value`` lines into an :class:`ExperimentConfig`.

    Raises:
        ConfigurationError: unknown key, malformed line, unparsable value
            (with the line number) or an out-of-range parameter.
    """
    engine_values: dict = {}
    exp_values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        parser, target = CONFIG_KEYS[key]
        try:
            parsed = parser(value)
        except ValueError:
            raise ConfigurationError(
                f"{source}:{lineno}: bad value {value!r} for {key!r} ({parser.__name__.lstrip('_')} expected)"
            ) from None
        if target is None:
            exp_values[key] = parsed
        else:
            engine_values[target] = parsed

    engine = EngineConfig(**engine_values)
    exp = ExperimentConfig(engine=engine, **exp_values)
    if exp.runs < 1:
        raise ConfigurationError(f"runs must be >= 1, got {exp.runs}")
    for name in exp.problems:
        if name not in REGISTRY:
            raise ConfigurationError(f"unknown problem {name!r}")
    for name in exp.algorithms:
        if name not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {name!r}")
    return exp


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), source=str(path))


def _problem(name: str, n: int | None):
    return get_problem(name) if n is None else get_problem(name, n=n)


def _job(args) -> dict:
    problem_name, algorithm, n, config, out_dir = args
    record = run(_problem(problem_name, n), config, algorithm)
    if out_dir is not None:
        record.write(out_dir, stem=f"seed{config.seed}")
    return record.summary()


def _map(jobs, n_jobs):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_job, jobs))


def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def run_experiment(exp: ExperimentConfig, out, jobs: int | None = None) -> dict:
    """Run the whole matrix and write outputs below ``out``.

    Layout: ``<out>/<problem>/<algorithm>/seed<s>_{archive.csv,trace.csv,summary.json}``,
    then ``table_igd.csv``/``table_hv.csv`` (and aligned ``.txt`` twins) and
    ``experiment.json`` at the root. Run index ``i`` uses seed
    ``first_seed + i`` for every algorithm, so algorithms are compared on
    paired seeds.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = default_jobs() if jobs is None else jobs
    tasks, keys = [], []
    for prob in exp.problems:
        for alg in exp.algorithms:
            for seed in exp.seeds:
                tasks.append((prob, alg, exp.n, exp.engine.replace(seed=seed), out / prob / alg))
                keys.append((alg, prob))
    summaries = _map(tasks, jobs)

    igd_values: dict = {}
    hv_values: dict = {}
    for key, summary in zip(keys, summaries):
        igd_values.setdefault(key, []).append(summary["final_igd"])
        hv_values.setdefault(key, []).append(summary["final_hv"])
    tables = {}
    for metric, values, smaller in (("igd", igd_values, True), ("hv", hv_values, False)):
        table = build_comparison_table(values, baseline=exp.algorithms[0], smaller_is_better=smaller, expected_runs=exp.runs)
        (out / f"table_{metric}.csv").write_text(table.to_csv(), encoding="utf-8")
        (out / f"table_{metric}.txt").write_text(table.to_text(), encoding="utf-8")
        tables[metric] = table
    meta = {
        "problems": list(exp.problems),
        "algorithms": list(exp.algorithms),
        "baseline": exp.algorithms[0],
        "seeds": exp.seeds,
        "paired_seeds": True,
        "n": exp.n,
        "engine": {k: v for k, v in sorted(vars(exp.engine).items()) if k != "seed"},
    }
    (out / "experiment.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return tables


def sweep_l(
    problem: str,
    values: Sequence[int],
    base: EngineConfig,
    seeds: Sequence[int],
    n: int | None = None,
    jobs: int = 1,
) -> list[dict]:
    """Mean/std of final IGD and HV of ``pps`` for each window length ``l``.

    Only ``l`` changes between rows; every row reuses the same seeds.
    """
    tasks = [(problem, "pps", n, base.replace(l=l, seed=s), None) for l in values for s in seeds]
    summaries = _map(tasks, jobs)
    rows = []
    per_l = len(seeds)
    for i, l in enumerate(values):
        chunk = summaries[i * per_l : (i + 1) * per_l]
        row = {"l": l}
        for metric in ("igd", "hv"):
            vals = [s[f"final_{metric}"] for s in chunk]
            if any(v is None for v in vals):
                row[f"mean_{metric}"] = row[f"std_{metric}"] = math.nan
            elif len(vals) == 1:
                row[f"mean_{metric}"], row[f"std_{metric}"] = vals[0], 0.0
            else:
                row[f"mean_{metric}"], row[f"std_{metric}"] = summarize(vals)
        row["switch_generations"] = [s["switch_generation"] for s in chunk]
        rows.append(row)
    return rows


def _sweep_csv(rows) -> str:
    lines = ["l,mean_igd,std_igd,mean_hv,std_hv"]
    for r in rows:
        lines.append(
            f"{r['l']},{r['mean_igd']:.6e},{r['std_igd']:.6e},{r['mean_hv']:.6e},{r['std_hv']:.6e}"
        )
    return "\n".join(lines) + "\n"


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pushpull", description="Push and pull search for constrained multi-objective problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one optimization run")
    p_run.add_argument("--problem", required=True, choices=sorted(REGISTRY))
    p_run.add_argument("--algorithm", default="pps", choices=ALGORITHMS)
    p_run.add_argument("--seed", type=int, default=1)
    p_run.add_argument("--evals", type=int, default=EngineConfig.max_evals)
    p_run.add_argument("--pop", type=int, default=EngineConfig.N)
    p_run.add_argument("--n", type=int, default=None, help="decision variables (problem default if omitted)")
    p_run.add_argument("--out", required=True)

    p_exp = sub.add_parser("experiment", help="run a problems x algorithms x seeds matrix")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--out", default="results")
    p_exp.add_argument("--jobs", type=int, default=None, help="worker processes (default: available cores)")

    p_sw = sub.add_parser("sweep-l", help="sensitivity of the two-stage algorithm to the window length l")
    p_sw.add_argument("--values", type=_int_list, required=True)
    p_sw.add_argument("--problem", required=True, choices=sorted(REGISTRY))
    p_sw.add_argument("--runs", type=int, default=30)
    p_sw.add_argument("--evals", type=int, default=EngineConfig.max_evals)
    p_sw.add_argument("--pop", type=int, default=EngineConfig.N)
    p_sw.add_argument("--n", type=int, default=None)
    p_sw.add_argument("--config", default=None, help="optional config file for the other parameters")
    p_sw.add_argument("--out", default=None, help="directory for sweep_l.csv")
    p_sw.add_argument("--jobs", type=int, default=None)

    sub.add_parser("list-problems", help="print the problem manifest as JSON")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list-problems":
            sys.stdout.write(problem_manifest() + "\n")
        elif args.command == "run":
            config = EngineConfig(N=args.pop, T=min(EngineConfig.T, args.pop), max_evals=args.evals, seed=args.seed)
            record = run(_problem(args.problem, args.n), config, args.algorithm)
            paths = record.write(args.out)
            print(json.dumps({k: str(v) for k, v in paths.items()}, sort_keys=True))
        elif args.command == "experiment":
            tables = run_experiment(load_config(args.config), args.out, args.jobs)
            sys.stdout.write(tables["igd"].to_text())
        elif args.command == "sweep-l":
            if args.config:
                exp = load_config(args.config)
                base, n = exp.engine, exp.n if args.n is None else args.n
            else:
                base = EngineConfig(N=args.pop, T=min(EngineConfig.T, args.pop), max_evals=args.evals)
                n = args.n
            seeds = list(range(1, args.runs + 1))
            jobs = default_jobs() if args.jobs is None else args.jobs
            text = _sweep_csv(sweep_l(args.problem, args.values, base, seeds, n, jobs))
            if args.out:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                (out / "sweep_l.csv").write_text(text, encoding="utf-8")
            sys.stdout.write(text)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    return 0
