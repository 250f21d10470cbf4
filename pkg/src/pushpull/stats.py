"""Run aggregation and the two-sample Wilcoxon rank-sum comparison."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import norm, rankdata

from .core import ContractViolation

MIN_SAMPLE = 4  # below this the approximation drifts from the exact test

A_BETTER = "A_better"
B_BETTER = "B_better"
NO_DIFFERENCE = "no_difference"


def summarize(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (``n - 1`` denominator).

    A single value gets a standard deviation of 0 and a ``RuntimeWarning``.
    """
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("summarize() needs at least one value")
    mean = math.fsum(vals) / len(vals)
    if len(vals) < 2:
        warnings.warn("standard deviation of a single value reported as 0", RuntimeWarning, stacklevel=2)
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
    return mean, math.sqrt(var)


@dataclass(frozen=True)
class RankSumResult:
    verdict: str
    p_value: float
    statistic: float  # rank sum of the first sample
    z: float


def _sum_cumulants(scores: np.ndarray, n: int) -> tuple[float, float]:
    """Variance and fourth cumulant of the sum of ``n`` values drawn without
    replacement from ``scores``."""
    N = scores.shape[0]
    c = scores - scores.mean()
    p2 = float(np.sum(c**2))
    p4 = float(np.sum(c**4))

    def falling(a, d):
        out = 1.0
        for i in range(d):
            out *= a - i
        return out

    # probability that d given distinct items are all in the sample
    pi = [falling(n, d) / falling(N, d) if N >= d else 0.0 for d in range(5)]
    var = (pi[1] - pi[2]) * p2
    m4 = (
        pi[1] * p4
        - 4 * pi[2] * p4
        + 3 * pi[2] * (p2 * p2 - p4)
        + 6 * pi[3] * (2 * p4 - p2 * p2)
        + pi[4] * (3 * p2 * p2 - 6 * p4)
    )
    return var, m4 - 3 * var * var


def wilcoxon_rank_sum(
    a: Sequence[float],
    b: Sequence[float],
    significance: float = 0.05,
    smaller_is_better: bool = True,
    method: str = "edgeworth",
) -> RankSumResult:
    """Two-sided Wilcoxon rank-sum test of ``a`` against ``b``.

    Ties get midranks and the variance is the exact permutation variance of
    the midranks (the usual tie correction). The p-value comes from a normal
    approximation with a 0.5 continuity correction; ``method="edgeworth"``
    (default) adds the fourth-cumulant Edgeworth term, which keeps the
    p-value close to the exact permutation value for samples as small as 4.
    ``method="normal"`` drops that term.

    When ``p < significance`` the verdict names the sample with the better
    mean rank (lower ranks if ``smaller_is_better``).

    Raises:
        ContractViolation: if either sample has fewer than 4 values.
    """
    if method not in ("edgeworth", "normal"):
        raise ValueError(f"unknown method {method!r}")
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    n1, n2 = x.shape[0], y.shape[0]
    if n1 < MIN_SAMPLE or n2 < MIN_SAMPLE:
        raise ContractViolation(f"rank-sum test needs at least {MIN_SAMPLE} values per sample, got {n1} and {n2}")
    ranks = rankdata(np.concatenate([x, y]))
    w = float(ranks[:n1].sum())
    mean = n1 * (n1 + n2 + 1) / 2.0
    var, k4 = _sum_cumulants(ranks, n1)
    if var <= 0:
        return RankSumResult(NO_DIFFERENCE, 1.0, w, 0.0)

    sd = math.sqrt(var)
    z = max(abs(w - mean) - 0.5, 0.0) / sd
    tail = norm.sf(z)
    if method == "edgeworth":
        tail += norm.pdf(z) * (k4 / var**2) / 24.0 * (z**3 - 3.0 * z)
    p = float(min(1.0, max(0.0, 2.0 * tail)))
    signed_z = math.copysign(z, w - mean)

    verdict = NO_DIFFERENCE
    if p < significance:
        a_lower = w / n1 < float(ranks[n1:].sum()) / n2
        verdict = A_BETTER if a_lower == smaller_is_better else B_BETTER
    return RankSumResult(verdict, p, w, signed_z)


# Markers for a compared algorithm relative to the baseline.
WORSE = "worse"
BETTER = "better"
NONE = "none"
INCOMPLETE = "incomplete"


@dataclass
class ComparisonTable:
    """Mean/std per (problem, algorithm) with markers against a baseline."""

    baseline: str
    algorithms: list[str]
    problems: list[str]
    cells: dict[tuple[str, str], dict] = field(default_factory=dict)
    tally: dict[str, tuple[int, int, int]] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["problem", "algorithm", "mean", "std", "runs", "marker", "p_value"])
        for prob in self.problems:
            for alg in self.algorithms:
                cell = self.cells[(alg, prob)]
                writer.writerow(
                    [
                        prob,
                        alg,
                        _fmt(cell["mean"]),
                        _fmt(cell["std"]),
                        cell["runs"],
                        cell["marker"],
                        _fmt(cell["p_value"]),
                    ]
                )
        for alg in self.algorithms:
            if alg != self.baseline:
                s, d, i = self.tally[alg]
                writer.writerow(["S-D-I", alg, "", "", "", f"{s}-{d}-{i}", ""])
        return buf.getvalue()

    def to_text(self) -> str:
        """Aligned plain text: two rows per problem (mean, std), markers
        ``+`` (worse than baseline) and ``-`` (better), and an S-D-I row."""
        sym = {WORSE: "+", BETTER: "-", NONE: "", INCOMPLETE: "?"}
        header = ["problem", ""] + self.algorithms
        rows = [header]
        for prob in self.problems:
            means, stds = [prob, "mean"], ["", "std"]
            for alg in self.algorithms:
                cell = self.cells[(alg, prob)]
                mark = "" if alg == self.baseline else sym[cell["marker"]]
                means.append(_fmt(cell["mean"]) + mark)
                stds.append(_fmt(cell["std"]))
            rows += [means, stds]
        last = ["S-D-I", ""]
        for alg in self.algorithms:
            last.append("--" if alg == self.baseline else "-".join(map(str, self.tally[alg])))
        rows.append(last)
        widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
        return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def _fmt(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.3E}"


def build_comparison_table(
    records: Mapping[tuple[str, str], Sequence[float] | None],
    baseline: str = "pps",
    smaller_is_better: bool = True,
    significance: float = 0.05,
    expected_runs: int | None = None,
) -> ComparisonTable:
    """Compare every algorithm against ``baseline`` on every problem.

    ``records`` maps ``(algorithm, problem)`` to per-run metric values. A cell
    is *incomplete* when its key is missing, it holds a ``None``/NaN value,
    or it has fewer than ``expected_runs`` values. Incomplete cells, cells
    whose baseline is incomplete and cells too small for the rank-sum test
    are left out of the S-D-I tally.
    """
    algorithms = sorted({alg for alg, _ in records}, key=lambda a: (a != baseline, a))
    problems = sorted({prob for _, prob in records})
    if baseline not in algorithms:
        raise ValueError(f"baseline {baseline!r} has no records")

    def values(alg, prob):
        vals = records.get((alg, prob))
        if vals is None or len(vals) == 0:
            return None
        if any(v is None or (isinstance(v, float) and math.isnan(v)) for v in vals):
            return None
        if len(vals) < (expected_runs or 0):
            return None
        return [float(v) for v in vals]

    table = ComparisonTable(baseline, algorithms, problems)
    for alg in algorithms:
        if alg != baseline:
            table.tally[alg] = (0, 0, 0)
    for prob in problems:
        base = values(baseline, prob)
        for alg in algorithms:
            vals = values(alg, prob)
            cell = {"mean": None, "std": None, "runs": 0, "marker": INCOMPLETE, "p_value": None}
            if vals is not None:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    cell["mean"], cell["std"] = summarize(vals)
                cell["runs"] = len(vals)
                cell["marker"] = NONE
            testable = vals is not None and base is not None and min(len(vals), len(base)) >= MIN_SAMPLE
            if alg != baseline and testable:
                res = wilcoxon_rank_sum(base, vals, significance, smaller_is_better)
                cell["p_value"] = res.p_value
                s, d, i = table.tally[alg]
                if res.verdict == A_BETTER:
                    cell["marker"], s = WORSE, s + 1
                elif res.verdict == B_BETTER:
                    cell["marker"], i = BETTER, i + 1
                else:
                    d += 1
                table.tally[alg] = (s, d, i)
            elif alg != baseline:
                cell["marker"] = INCOMPLETE
            table.cells[(alg, prob)] = cell
    return table
