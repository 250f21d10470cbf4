"""Shared domain types: individuals, constraint violation and dominance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_EQ_TOLERANCE = 1e-4


class PushPullError(Exception):
    """Base class for every error raised by this package."""


class EvaluationError(PushPullError):
    """A problem evaluation produced a non-finite value."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class ConfigurationError(PushPullError, ValueError):
    """An invalid parameter or parameter combination."""


class ContractViolation(PushPullError, ValueError):
    """A caller broke an operation's precondition (shapes, bounds)."""


class UnsupportedOperation(PushPullError):
    """The requested operation is not available for this input."""


class UndefinedMetric(PushPullError):
    """A quality indicator cannot be computed (for example an empty set)."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Individual:
    """An evaluated decision vector.

    Instances are immutable: ``x``, ``f`` are read-only arrays and any change
    to the decision vector must go through :meth:`Problem.evaluate` again.
    """

    x: np.ndarray
    f: np.ndarray
    violation: float

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "f", _frozen(self.f))
        if not self.violation >= 0.0:
            raise ContractViolation(f"violation must be >= 0, got {self.violation}")
        object.__setattr__(self, "violation", float(self.violation))

    @property
    def feasible(self) -> bool:
        return self.violation == 0.0

    def __eq__(self, other):
        if not isinstance(other, Individual):
            return NotImplemented
        return (
            self.violation == other.violation
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.f, other.f)
        )

    def __hash__(self):
        return hash((self.x.tobytes(), self.f.tobytes(), self.violation))


@dataclass(frozen=True)
class IdealNadirPair:
    ideal: np.ndarray
    nadir: np.ndarray

    @classmethod
    def from_objectives(cls, F) -> "IdealNadirPair":
        F = np.atleast_2d(np.asarray(F, dtype=float))
        if F.shape[0] == 0:
            raise ContractViolation("ideal/nadir of an empty population")
        return cls(_frozen(F.min(axis=0)), _frozen(F.max(axis=0)))


def overall_violation(g_values: Sequence[float], h_transformed: Sequence[float] = ()) -> float:
    """Sum of the magnitudes of every negative constraint value.

    Both inputs follow the ``c(x) >= 0`` convention; equality constraints must
    already be passed through :func:`transform_equality`.

    Raises:
        EvaluationError: if any entry is NaN or infinite. ``index`` counts
            inequality entries first, then the transformed equalities.
    """
    values = np.concatenate(
        [np.asarray(g_values, dtype=float).ravel(), np.asarray(h_transformed, dtype=float).ravel()]
    )
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        idx = int(bad[0])
        raise EvaluationError(f"non-finite constraint value at index {idx}", index=idx)
    # + 0.0 turns a negative zero into 0.0
    return float(-np.minimum(values, 0.0).sum()) + 0.0


def transform_equality(h_value, eq_tolerance: float = DEFAULT_EQ_TOLERANCE):
    """Turn ``h(x) = 0`` into the inequality ``tol - |h(x)| >= 0``.

    Works elementwise on arrays as well as on scalars.
    """
    if not eq_tolerance > 0:
        raise ConfigurationError(f"eq_tolerance must be positive, got {eq_tolerance}")
    return eq_tolerance - np.abs(h_value)


def _objectives(a) -> np.ndarray:
    return a.f if isinstance(a, Individual) else np.asarray(a, dtype=float)


def dominates(a, b) -> bool:
    """Pareto dominance for minimization, on objective values only.

    Accepts individuals or raw objective vectors. Feasibility is ignored;
    callers filter infeasible solutions beforehand when needed.
    """
    fa, fb = _objectives(a), _objectives(b)
    if fa.shape != fb.shape:
        raise ContractViolation(f"objective length mismatch: {fa.shape} vs {fb.shape}")
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def nondominated_mask(F) -> np.ndarray:
    """Boolean mask of the rows of ``F`` not dominated by any other row.

    Duplicate rows do not dominate each other, so all copies are kept.
    """
    F = np.asarray(F, dtype=float)
    if F.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dominated = np.any(le & lt, axis=0)
    return ~dominated
