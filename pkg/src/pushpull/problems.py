"""Constrained test problems and reference-front sampling.

Every problem here follows the ``g(x) >= 0`` / ``h(x) = 0`` convention and is
minimized. The four ``DeskCMOP`` problems share one bi-objective base,

    f1 = x1,  f2 = 1 - x1 + sum_{i>=2} x_i^2,  x in [0, 1]^n,

whose unconstrained front is the segment f1 + f2 = 1. Each adds a single
constraint written in objective space so that the infeasible region has a
simple picture:

* ``deskcmop-block``: a band 1.1 < f1 + f2 < 1.3 sits in front of the
  unconstrained front; the constrained front is unchanged.
* ``deskcmop-boundary``: f1 + f2 >= 1.1 makes the unconstrained front
  infeasible; the constrained front is the boundary f1 + f2 = 1.1.
* ``deskcmop-partial``: |f1 - 0.45| >= 0.15 removes the middle of the front,
  leaving two disconnected pieces.
* ``deskcmop-eq``: an equality x2 = 0.2, so the front shifts to
  f2 = 1.04 - f1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_EQ_TOLERANCE,
    ConfigurationError,
    ContractViolation,
    EvaluationError,
    Individual,
    UnsupportedOperation,
    overall_violation,
    transform_equality,
)


@dataclass(frozen=True)
class ReferenceFront:
    points: np.ndarray

    @property
    def count(self) -> int:
        return int(self.points.shape[0])


class Problem:
    """Base class for a box-constrained CMOP.

    Subclasses set ``name``, ``m``, ``q``, ``p`` and implement
    :meth:`objectives` plus, when ``q``/``p`` are non-zero,
    :meth:`inequalities` and :meth:`equalities`.
    """

    name = "problem"
    m = 2
    q = 0
    p = 0

    def __init__(self, n: int, lower, upper, eq_tolerance: float = DEFAULT_EQ_TOLERANCE):
        if n < 1:
            raise ConfigurationError(f"n must be >= 1, got {n}")
        if self.m < 2:
            raise ConfigurationError(f"m must be >= 2, got {self.m}")
        if not eq_tolerance > 0:
            raise ConfigurationError(f"eq_tolerance must be positive, got {eq_tolerance}")
        self.n = int(n)
        self.lower = np.broadcast_to(np.asarray(lower, dtype=float), (self.n,)).copy()
        self.upper = np.broadcast_to(np.asarray(upper, dtype=float), (self.n,)).copy()
        if np.any(self.lower >= self.upper):
            raise ConfigurationError("every lower bound must be strictly below its upper bound")
        self.lower.setflags(write=False)
        self.upper.setflags(write=False)
        self.eq_tolerance = float(eq_tolerance)

    @property
    def bounds(self) -> list[tuple[float, float]]:
        return list(zip(self.lower.tolist(), self.upper.tolist()))

    def objectives(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inequalities(self, x: np.ndarray, f: np.ndarray) -> np.ndarray:
        return np.zeros(0)

    def equalities(self, x: np.ndarray, f: np.ndarray) -> np.ndarray:
        return np.zeros(0)

    def violation(self, x: np.ndarray, f: np.ndarray) -> float:
        g = self.inequalities(x, f)
        if self.p:
            g = np.concatenate([g, transform_equality(self.equalities(x, f), self.eq_tolerance)])
        if g.size and np.isfinite(g).all():
            return float(-g.clip(max=0.0).sum()) + 0.0
        return overall_violation(g)

    def evaluate(self, x) -> Individual:
        """Evaluate ``x`` and return an immutable :class:`Individual`.

        Raises:
            ContractViolation: wrong length or ``x`` outside the box.
            EvaluationError: an objective or constraint is not finite.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ContractViolation(f"expected a decision vector of length {self.n}, got {x.shape}")
        if (x < self.lower).any() or (x > self.upper).any():
            raise ContractViolation("decision vector outside the box bounds")
        f = np.asarray(self.objectives(x), dtype=float)
        if not np.isfinite(f).all():
            i = int(np.flatnonzero(~np.isfinite(f))[0])
            raise EvaluationError(f"non-finite objective f{i + 1}", index=i)
        return Individual(x, f, self.violation(x, f))

    def manifest(self) -> dict:
        return {"name": self.name, "n": self.n, "m": self.m, "q": self.q, "p": self.p}

    @property
    def default_reference_count(self) -> int:
        return 1000 if self.m == 2 else 10000

    def reference_front(self, count: int) -> np.ndarray:
        raise UnsupportedOperation(f"{self.name} has no analytic constrained front")


class ConstraintStub(Problem):
    """Wraps a problem and reports every point as feasible.

    Objectives are untouched; useful to show that a search stage does not
    look at constraints.
    """

    def __init__(self, inner: Problem):
        super().__init__(inner.n, inner.lower, inner.upper, inner.eq_tolerance)
        self.inner = inner
        self.name = f"{inner.name}-unconstrained"
        self.m = inner.m

    def objectives(self, x):
        return self.inner.objectives(x)

    def violation(self, x, f):
        return 0.0


class _DeskBase(Problem):
    m = 2
    q = 1

    def __init__(self, n: int = 30, eq_tolerance: float = DEFAULT_EQ_TOLERANCE):
        if n < 2:
            raise ConfigurationError("desk problems need n >= 2")
        super().__init__(n, 0.0, 1.0, eq_tolerance)

    def objectives(self, x):
        x1 = x[0]
        tail = x[1:]
        return np.array([x1, 1.0 - x1 + float(tail @ tail)])

    # offset c of the constrained front f1 + f2 = 1 + c
    front_offset = 0.0

    def _front_f1(self, count: int) -> np.ndarray:
        return np.linspace(0.0, 1.0, count)

    def reference_front(self, count: int) -> np.ndarray:
        if count < 1:
            raise ConfigurationError(f"count must be positive, got {count}")
        f1 = self._front_f1(count)
        return np.column_stack([f1, 1.0 + self.front_offset - f1])

    def witness(self, point) -> np.ndarray:
        """A decision vector whose objectives equal ``point`` on the front."""
        f1, f2 = float(point[0]), float(point[1])
        x = np.zeros(self.n)
        x[0] = f1
        x[1] = np.sqrt(max(f2 - 1.0 + f1, 0.0))
        return x


class DeskBlock(_DeskBase):
    name = "deskcmop-block"

    def inequalities(self, x, f):
        return np.array([abs(f[0] + f[1] - 1.2) - 0.1])


class DeskBoundary(_DeskBase):
    name = "deskcmop-boundary"
    front_offset = 0.1

    def inequalities(self, x, f):
        return np.array([f[0] + f[1] - 1.1])


class DeskPartial(_DeskBase):
    name = "deskcmop-partial"
    # feasible f1 pieces of the front: [0, 0.3] and [0.6, 1]
    gap = (0.3, 0.6)

    def inequalities(self, x, f):
        return np.array([(f[0] - 0.45) ** 2 - 0.0225])

    def _front_f1(self, count):
        lo, hi = self.gap
        t = np.linspace(0.0, 1.0 - (hi - lo), count)
        return np.where(t > lo, t + (hi - lo), t)


class DeskEq(_DeskBase):
    name = "deskcmop-eq"
    q = 0
    p = 1
    front_offset = 0.04

    def equalities(self, x, f):
        return np.array([x[1] - 0.2])


REGISTRY: dict[str, type[Problem]] = {
    cls.name: cls for cls in (DeskBlock, DeskBoundary, DeskPartial, DeskEq)
}


def get_problem(name: str, **kwargs) -> Problem:
    try:
        cls = REGISTRY[name.lower()]
    except KeyError:
        raise ConfigurationError(
            f"unknown problem {name!r}; choose from {', '.join(sorted(REGISTRY))}"
        ) from None
    return cls(**kwargs)


def problem_manifest(**kwargs) -> str:
    """JSON list of ``{name, n, m, q, p}`` for every registered problem."""
    return json.dumps([get_problem(name, **kwargs).manifest() for name in sorted(REGISTRY)], indent=2)


def sample_reference_front(problem: Problem, count: int | None = None) -> ReferenceFront:
    """Sample ``count`` points evenly along the problem's constrained front.

    ``count`` defaults to 1000 for two objectives and 10000 for three.

    Raises:
        UnsupportedOperation: the problem has no analytic front.
    """
    if count is None:
        count = problem.default_reference_count
    points = np.asarray(problem.reference_front(int(count)), dtype=float)
    points.setflags(write=False)
    return ReferenceFront(points)
