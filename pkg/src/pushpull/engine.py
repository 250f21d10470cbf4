"""Decomposition-based evolutionary engine with push and pull search.

One run decomposes the problem into ``N`` Tchebycheff subproblems. With the
``pps`` algorithm the run starts in a *push* stage that ignores constraints
entirely; once the ideal and nadir points of the population stop moving it
switches, for good, to a *pull* stage driven by an epsilon-relaxed
comparison whose epsilon level shrinks towards zero. The baseline algorithms
(``cdp``, ``sr``, ``epsilon``, and the single-rule ``push``/``pull``) run the
same loop with a fixed replacement rule.

Random stream, consumed in this order from one ``numpy.random.Generator``
seeded with ``config.seed``: the initial population (``N * n`` uniforms);
then, each generation, a permutation of the subproblems and, for every
subproblem, one uniform for the mating pool, two uniforms picking distinct
parents from the pool, the DE draws, the mutation draws, a permutation of the
pool, and for ``sr`` one uniform per pool member.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from .core import ConfigurationError, IdealNadirPair, UnsupportedOperation, nondominated_mask
from .decomposition import WEIGHT_FLOOR, build_neighborhoods, generate_weights
from .metrics import hypervolume, igd, reference_point
from .problems import Problem, sample_reference_front
from .selection import ComparatorKind, cdp_decision, pull_decision, push_decision, sr_decision
from .variation import VariationConfig, de_offspring, polynomial_mutation

ALGORITHMS = ("pps", "cdp", "sr", "epsilon", "push", "pull")


@dataclass(frozen=True)
class EngineConfig:
    N: int = 300
    T: int = 30
    delta: float = 0.9
    nr: int = 2
    Tc: int = 800
    alpha: float = 0.95
    tau: float = 0.1
    cp: float = 2.0
    l: int = 20
    switch_threshold: float = 1e-3
    max_evals: int = 300_000
    seed: int = 0
    de_f: float = 0.5
    de_cr: float = 1.0
    pm: float | None = None
    eta_m: float = 20.0
    sr_pf: float = 0.05
    # fraction of N: the static-epsilon baseline starts from the violation
    # of the ceil(theta * N)-th least violated initial individual
    theta: float = 0.05
    # forbid epsilon from growing again when the feasible ratio recovers
    epsilon_monotone: bool = True
    archive_capacity: int | None = None
    track_igd: bool = True
    debug: bool = False

    def __post_init__(self):
        def check(ok, msg):
            if not ok:
                raise ConfigurationError(msg)

        check(self.N >= 2, f"N must be >= 2, got {self.N}")
        check(1 <= self.T <= self.N, f"T must lie in [1, N], got {self.T}")
        check(0.0 <= self.delta <= 1.0, f"delta must lie in [0, 1], got {self.delta}")
        check(self.nr >= 1, f"nr must be >= 1, got {self.nr}")
        check(self.Tc >= 1, f"Tc must be >= 1, got {self.Tc}")
        check(0.0 <= self.alpha <= 1.0, f"alpha must lie in [0, 1], got {self.alpha}")
        check(0.0 <= self.tau <= 1.0, f"tau must lie in [0, 1], got {self.tau}")
        check(self.cp > 0, f"cp must be positive, got {self.cp}")
        check(self.l >= 1, f"l must be >= 1, got {self.l}")
        check(self.switch_threshold >= 0, f"switch_threshold must be >= 0, got {self.switch_threshold}")
        check(self.max_evals >= 1, f"max_evals must be positive, got {self.max_evals}")
        check(0.0 <= self.sr_pf <= 1.0, f"sr_pf must lie in [0, 1], got {self.sr_pf}")
        check(0.0 < self.theta <= 1.0, f"theta must lie in (0, 1], got {self.theta}")
        check(
            self.archive_capacity is None or self.archive_capacity >= 1,
            f"archive_capacity must be positive, got {self.archive_capacity}",
        )
        self.variation  # validates the operator settings

    @property
    def variation(self) -> VariationConfig:
        return VariationConfig(de_f=self.de_f, de_cr=self.de_cr, pm=self.pm, eta_m=self.eta_m)

    def replace(self, **changes) -> "EngineConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return EngineConfig(**values)


@dataclass
class StageState:
    push_stage: bool = True
    epsilon_k: float = 0.0
    epsilon_0: float = 0.0
    r_k: float = 1.0
    feasible_ratio: float = 0.0
    history: deque = field(default_factory=deque)


@dataclass(frozen=True)
class Archive:
    """Feasible, mutually non-dominated solutions (rows of ``X``/``F``)."""

    X: np.ndarray
    F: np.ndarray

    @classmethod
    def empty(cls, n: int, m: int) -> "Archive":
        return cls(np.zeros((0, n)), np.zeros((0, m)))

    def __len__(self):
        return self.F.shape[0]


def max_change_rate(history, k: int, l: int) -> float:
    """Largest relative move of the ideal or nadir point over ``l`` generations.

    ``history`` holds :class:`IdealNadirPair` entries, oldest first, and must
    reach back ``l`` generations (its last entry is generation ``k``).
    Returns the initial rate 1.0 while ``k < l``.
    """
    if k < l:
        return 1.0
    if len(history) < l + 1:
        raise ConfigurationError(f"history holds {len(history)} entries, need {l + 1}")
    old, new = history[-(l + 1)], history[-1]

    def rate(now, before):
        now = np.asarray(now, dtype=float)
        before = np.asarray(before, dtype=float)
        return float(np.max(np.abs(now - before) / np.maximum(np.abs(before), 1e-6)))

    return max(rate(new.ideal, old.ideal), rate(new.nadir, old.nadir))


def update_epsilon(state: StageState, k: int, config: EngineConfig) -> float:
    """Next epsilon level of the pull stage.

    ``state.epsilon_k`` is the previous level and ``state.feasible_ratio`` the
    current fraction of strictly feasible individuals. Zero from generation
    ``Tc`` on; below the ``alpha`` feasibility ratio the level shrinks by
    ``1 - tau``; otherwise it follows ``eps0 * (1 - k/Tc)^cp``, capped at the
    previous level when ``config.epsilon_monotone`` is set.
    """
    if k >= config.Tc:
        return 0.0
    if state.feasible_ratio < config.alpha:
        return (1.0 - config.tau) * state.epsilon_k
    decayed = state.epsilon_0 * (1.0 - k / config.Tc) ** config.cp
    if config.epsilon_monotone:
        return min(decayed, state.epsilon_k)
    return decayed


def observe_generation(state: StageState, k: int, config: EngineConfig, pair: IdealNadirPair, feasible_ratio: float) -> None:
    """Record generation ``k``'s population ideal/nadir pair and feasible ratio,
    and refresh ``state.r_k`` once ``k >= l``."""
    state.history.append(pair)
    state.feasible_ratio = feasible_ratio
    if k >= config.l:
        state.r_k = max_change_rate(state.history, k, config.l)


def advance_stage(state: StageState, k: int, config: EngineConfig, max_violation: float) -> bool:
    """Stage logic of the two-stage search for generation ``k``.

    Call after :func:`observe_generation`. Switches from push to pull when
    ``k >= l`` and ``r_k <= switch_threshold`` (only before ``Tc``), setting
    both epsilon levels to ``max_violation``; then, while pulling, updates the
    epsilon level. Returns True exactly in the generation of the switch.
    """
    if k >= config.Tc:
        state.epsilon_k = 0.0
        return False
    switched = False
    if state.push_stage and k >= config.l and state.r_k <= config.switch_threshold:
        state.push_stage = False
        state.epsilon_0 = state.epsilon_k = max_violation
        switched = True
    if not state.push_stage:
        state.epsilon_k = update_epsilon(state, k, config)
    return switched


def static_epsilon(eps0: float, k: int, config: EngineConfig) -> float:
    """``eps0 * (1 - k/Tc)^cp`` before ``Tc``, zero afterwards."""
    if k >= config.Tc:
        return 0.0
    return eps0 * (1.0 - k / config.Tc) ** config.cp


def crowding_distance(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    count, m = F.shape
    dist = np.zeros(count)
    if count <= 2:
        return np.full(count, np.inf)
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        col = F[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def nd_select(archive: Archive, X, F, V, capacity: int) -> Archive:
    """Feasible non-dominated members of ``archive`` plus the population.

    Duplicate objective vectors keep their first occurrence (archive rows
    come first). Above ``capacity`` the largest crowding distances survive,
    ties going to the earlier row.
    """
    X = np.vstack([archive.X, np.asarray(X, dtype=float)])
    F = np.vstack([archive.F, np.asarray(F, dtype=float)])
    V = np.concatenate([np.zeros(len(archive)), np.asarray(V, dtype=float)])
    keep = V == 0.0
    X, F = X[keep], F[keep]
    if F.shape[0] == 0:
        return Archive(X, F)
    _, first = np.unique(F, axis=0, return_index=True)
    first.sort()
    X, F = X[first], F[first]
    nd = nondominated_mask(F)
    X, F = X[nd], F[nd]
    if F.shape[0] > capacity:
        cd = crowding_distance(F)
        order = np.lexsort((np.arange(F.shape[0]), -cd))[:capacity]
        order.sort()
        X, F = X[order], F[order]
    return Archive(X, F)


@dataclass
class RunRecord:
    problem: str
    algorithm: str
    seed: int
    config: dict
    archive: Archive
    population_X: np.ndarray
    population_F: np.ndarray
    population_V: np.ndarray
    trace: list[dict]
    switch_generation: int | None
    final_igd: float | None
    final_hv: float | None
    evals: int

    def archive_csv(self) -> str:
        m = self.archive.F.shape[1]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"f{i + 1}" for i in range(m)] + ["violation"])
        for row in self.archive.F:
            writer.writerow([f"{v:.17e}" for v in row] + [f"{0.0:.17e}"])
        return buf.getvalue()

    def trace_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["gen", "stage", "r_k", "epsilon", "feasible_ratio", "evals"])
        for t in self.trace:
            writer.writerow(
                [
                    t["gen"],
                    t["stage"],
                    f"{t['r_k']:.17e}",
                    f"{t['epsilon']:.17e}",
                    f"{t['feasible_ratio']:.17e}",
                    t["evals"],
                ]
            )
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "problem": self.problem,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "switch_generation": self.switch_generation,
            "final_igd": self.final_igd,
            "final_hv": self.final_hv,
            "evals": self.evals,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"

    def write(self, directory, stem: str = "") -> dict[str, Path]:
        """Write ``archive.csv``, ``trace.csv`` and ``summary.json``.

        A non-empty ``stem`` prefixes each name (``seed1_archive.csv``).
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        prefix = f"{stem}_" if stem else ""
        paths = {
            "archive": directory / f"{prefix}archive.csv",
            "trace": directory / f"{prefix}trace.csv",
            "summary": directory / f"{prefix}summary.json",
        }
        paths["archive"].write_text(self.archive_csv(), encoding="utf-8")
        paths["trace"].write_text(self.trace_csv(), encoding="utf-8")
        paths["summary"].write_text(self.summary_json(), encoding="utf-8")
        return paths


@dataclass(frozen=True)
class GenerationSnapshot:
    """What a run looks like at the end of generation ``gen``."""

    gen: int
    push_stage: bool
    epsilon: float
    r_k: float
    ideal: np.ndarray
    X: np.ndarray
    F: np.ndarray
    V: np.ndarray
    archive: Archive


def _resolve(kind) -> ComparatorKind | str:
    if isinstance(kind, ComparatorKind):
        return kind
    name = str(kind).lower()
    if name not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {kind!r}; choose from {', '.join(ALGORITHMS)}")
    return name


def _algorithm_name(kind) -> str:
    if isinstance(kind, ComparatorKind):
        return {"static_epsilon": "epsilon"}.get(kind.tag, kind.tag)
    return kind


class _InvariantError(AssertionError):
    pass


def run(
    problem: Problem,
    config: EngineConfig,
    comparator_kind="pps",
    callback: Callable[[GenerationSnapshot], None] | None = None,
    reference=None,
) -> RunRecord:
    """Run one optimization and return its :class:`RunRecord`.

    Args:
        problem: the problem to minimize.
        config: engine parameters; ``config.seed`` fixes the whole run.
        comparator_kind: ``"pps"`` (two-stage), ``"cdp"``, ``"sr"``,
            ``"epsilon"``, ``"push"``, ``"pull"``, or a
            :class:`ComparatorKind`.
        callback: called with a :class:`GenerationSnapshot` after every
            generation.
        reference: reference front for IGD/HV; sampled from the problem when
            omitted and available.
    """
    kind = _resolve(comparator_kind)
    algorithm = _algorithm_name(kind)
    if isinstance(kind, ComparatorKind):
        tag = {"static_epsilon": "epsilon"}.get(kind.tag, kind.tag)
        fixed_eps, p_f = kind.epsilon, kind.p_f
    else:
        tag = kind
        fixed_eps, p_f = 0.0, config.sr_pf

    N, n, m = config.N, problem.n, problem.m
    if config.max_evals < 2 * N:
        raise ConfigurationError(
            f"max_evals={config.max_evals} cannot cover initialization plus one generation of N={N}"
        )
    capacity = config.archive_capacity or N
    vcfg = config.variation
    lower, upper = problem.lower, problem.upper

    if reference is None:
        try:
            reference = sample_reference_front(problem)
        except UnsupportedOperation:
            reference = None
    ref_points = None if reference is None else getattr(reference, "points", reference)
    ref_hv = None if ref_points is None else reference_point(ref_points)

    rng = np.random.default_rng(config.seed)
    W = generate_weights(m, N)
    W_floor = np.maximum(W, WEIGHT_FLOOR)
    B = build_neighborhoods(W, config.T)
    all_idx = np.arange(N)

    X = lower + rng.random((N, n)) * (upper - lower)
    F = np.empty((N, m))
    V = np.empty(N)
    for i in range(N):
        ind = problem.evaluate(X[i])
        F[i], V[i] = ind.f, ind.violation
    evals = N
    z = F.min(axis=0)

    state = StageState(push_stage=tag in ("pps", "push"), history=deque(maxlen=config.l + 1))
    switch_generation = None
    eps_static0 = 0.0
    if tag == "epsilon":
        theta = max(1, math.ceil(config.theta * N))
        eps_static0 = float(np.sort(V)[theta - 1])
    archive = nd_select(Archive.empty(n, m), X, F, V, capacity)
    trace: list[dict] = []
    prev_ideal = z.copy()

    k = 0
    while evals + N <= config.max_evals:
        observe_generation(state, k, config, IdealNadirPair.from_objectives(F), float(np.mean(V == 0.0)))
        if tag == "pps":
            if advance_stage(state, k, config, float(V.max())):
                switch_generation = k
        elif tag == "epsilon":
            state.epsilon_k = static_epsilon(eps_static0, k, config)
        elif tag == "pull":
            state.epsilon_k = fixed_eps
        eps = state.epsilon_k
        pushing = state.push_stage

        for j in rng.permutation(N):
            S = B[j] if rng.random() < config.delta else all_idx
            # two distinct parents from two uniforms: b skips over a
            ua, ub = rng.random(2)
            a = int(ua * len(S))
            b = int(ub * (len(S) - 1))
            if b >= a:
                b += 1
            y = de_offspring(X[j], X[S[a]], X[S[b]], vcfg, rng, lower, upper)
            y = polynomial_mutation(y, vcfg, rng, lower, upper)
            child = problem.evaluate(y)
            evals += 1
            fc, vc = child.f, child.violation
            np.minimum(z, fc, out=z)

            order = rng.permutation(S)
            w = W_floor[order]
            g_child = (np.abs(fc - z) / w).max(axis=1)
            g_inc = (np.abs(F[order] - z) / w).max(axis=1)
            v_inc = V[order]
            if tag == "pps":
                if pushing:
                    ok = push_decision(g_child, g_inc)
                else:
                    ok = pull_decision(g_child, g_inc, vc, v_inc, eps)
            elif tag == "push":
                ok = push_decision(g_child, g_inc)
            elif tag in ("pull", "epsilon"):
                ok = pull_decision(g_child, g_inc, vc, v_inc, eps)
            elif tag == "cdp":
                ok = cdp_decision(g_child, g_inc, vc, v_inc)
            else:
                ok = sr_decision(g_child, g_inc, vc, v_inc, p_f, rng.random(len(order)))
            # each pool member is compared once, so deciding the whole pool
            # up front matches a sequential scan that stops after nr wins
            hits = order[np.flatnonzero(ok)[: config.nr]]
            if hits.size:
                X[hits] = child.x
                F[hits] = fc
                V[hits] = vc

        archive = nd_select(archive, X, F, V, capacity)
        entry = {
            "gen": k,
            "stage": "push" if pushing else "pull",
            "r_k": state.r_k,
            "epsilon": eps,
            "feasible_ratio": state.feasible_ratio,
            "evals": evals,
            "igd": None,
        }
        if config.track_igd and ref_points is not None and len(archive):
            entry["igd"] = igd(ref_points, archive.F)
        if config.debug:
            _check_invariants(trace, entry, archive, prev_ideal, z)
            prev_ideal = z.copy()
        trace.append(entry)
        if callback is not None:
            callback(
                GenerationSnapshot(
                    gen=k,
                    push_stage=pushing,
                    epsilon=eps,
                    r_k=state.r_k,
                    ideal=z.copy(),
                    X=X.copy(),
                    F=F.copy(),
                    V=V.copy(),
                    archive=archive,
                )
            )
        k += 1

    final_igd = final_hv = None
    if ref_points is not None and len(archive):
        final_igd = igd(ref_points, archive.F)
        final_hv = hypervolume(archive.F, ref_hv)
    return RunRecord(
        problem=problem.name,
        algorithm=algorithm,
        seed=config.seed,
        config=asdict(config),
        archive=archive,
        population_X=X,
        population_F=F,
        population_V=V,
        trace=trace,
        switch_generation=switch_generation,
        final_igd=final_igd,
        final_hv=final_hv,
        evals=evals,
    )


def _check_invariants(trace, entry, archive, prev_ideal, ideal):
    if np.any(ideal > prev_ideal):
        raise _InvariantError(f"generation {entry['gen']}: ideal point moved up")
    if len(archive) and not nondominated_mask(archive.F).all():
        raise _InvariantError(f"generation {entry['gen']}: archive holds a dominated member")
    if trace:
        last = trace[-1]
        if last["stage"] == "pull" and entry["stage"] == "push":
            raise _InvariantError(f"generation {entry['gen']}: stage flipped back to push")
        if last["stage"] == "pull" and entry["epsilon"] > last["epsilon"]:
            raise _InvariantError(f"generation {entry['gen']}: epsilon increased during pull")
