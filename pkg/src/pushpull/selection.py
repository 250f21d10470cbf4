"""Replacement rules deciding whether a child takes over a subproblem.

Every rule answers one question: should ``child`` replace ``incumbent`` for
the subproblem with weight ``weight`` given the current ideal point? The
``*_decision`` helpers take precomputed Tchebycheff values and violations as
equally shaped arrays, so the engine can score a whole mating pool at once.
The ``*_replace`` functions apply the same rules to one pair of individuals
with plain float arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError
from .decomposition import _as_list, _tchebycheff_lists


def push_decision(g_child, g_inc):
    return np.less_equal(g_child, g_inc)


def pull_decision(g_child, g_inc, v_child, v_inc, epsilon):
    relaxed = np.logical_and(np.less_equal(v_child, epsilon), np.less_equal(v_inc, epsilon))
    by_objective = np.logical_or(relaxed, np.equal(v_child, v_inc))
    return np.where(by_objective, np.less_equal(g_child, g_inc), np.less(v_child, v_inc))


def cdp_decision(g_child, g_inc, v_child, v_inc):
    # equal violations (including both feasible) fall back to the objective
    child_ok = np.equal(v_child, 0.0)
    inc_ok = np.equal(v_inc, 0.0)
    by_violation = np.where(
        np.equal(v_child, v_inc), np.less_equal(g_child, g_inc), np.less(v_child, v_inc)
    )
    return np.where(child_ok != inc_ok, child_ok, by_violation)


def sr_decision(g_child, g_inc, v_child, v_inc, p_f, u):
    return np.where(
        np.less(u, p_f), np.less_equal(g_child, g_inc), cdp_decision(g_child, g_inc, v_child, v_inc)
    )


def _scores(incumbent, child, weight, ideal):
    w, z = _as_list(weight), _as_list(ideal)
    return _tchebycheff_lists(child.f.tolist(), w, z), _tchebycheff_lists(incumbent.f.tolist(), w, z)


def _cdp(g_child, g_inc, v_child, v_inc) -> bool:
    child_ok, inc_ok = v_child == 0.0, v_inc == 0.0
    if child_ok != inc_ok:
        return child_ok
    if v_child == v_inc:
        return g_child <= g_inc
    return v_child < v_inc


def _pull(g_child, g_inc, v_child, v_inc, epsilon) -> bool:
    if (v_child <= epsilon and v_inc <= epsilon) or v_child == v_inc:
        return g_child <= g_inc
    return v_child < v_inc


def push_replace(incumbent, child, weight, ideal) -> bool:
    """Objectives only: replace when the child's Tchebycheff value is no worse."""
    g_child, g_inc = _scores(incumbent, child, weight, ideal)
    return g_child <= g_inc


def pull_replace(incumbent, child, weight, ideal, epsilon: float) -> bool:
    """Epsilon-relaxed comparison.

    Both within ``epsilon``: compare Tchebycheff values. Equal violations:
    compare Tchebycheff values. Otherwise the smaller violation wins.
    """
    g_child, g_inc = _scores(incumbent, child, weight, ideal)
    return _pull(g_child, g_inc, child.violation, incumbent.violation, epsilon)


def cdp_replace(incumbent, child, weight, ideal) -> bool:
    """Constraint dominance: feasible beats infeasible, then smaller violation,
    then the Tchebycheff value among feasible pairs."""
    g_child, g_inc = _scores(incumbent, child, weight, ideal)
    return _cdp(g_child, g_inc, child.violation, incumbent.violation)


def sr_replace(incumbent, child, weight, ideal, p_f: float, rng) -> bool:
    """Stochastic ranking for one comparison.

    Draws ``u ~ U[0, 1)`` from ``rng`` (always exactly one draw); objectives
    only when ``u < p_f``, constraint dominance otherwise.
    """
    u = rng.random()
    g_child, g_inc = _scores(incumbent, child, weight, ideal)
    if u < p_f:
        return g_child <= g_inc
    return _cdp(g_child, g_inc, child.violation, incumbent.violation)


@dataclass(frozen=True)
class ComparatorKind:
    """Which replacement rule a run uses.

    ``tag`` is one of ``push``, ``pull``, ``cdp``, ``sr``, ``static_epsilon``.
    ``epsilon`` is the fixed level for ``pull``; ``p_f`` the objective-only
    probability for ``sr``.
    """

    tag: str
    epsilon: float = 0.0
    p_f: float = 0.05

    TAGS = ("push", "pull", "cdp", "sr", "static_epsilon")

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ConfigurationError(f"unknown comparator {self.tag!r}")
        if not self.epsilon >= 0:
            raise ConfigurationError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0.0 <= self.p_f <= 1.0:
            raise ConfigurationError(f"p_f must lie in [0, 1], got {self.p_f}")
