"""Quality indicators: IGD, exact hypervolume for two and three objectives."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.spatial.distance import cdist

from .core import ContractViolation, UndefinedMetric, UnsupportedOperation
from .problems import ReferenceFront


def _points(front) -> np.ndarray:
    if isinstance(front, ReferenceFront):
        front = front.points
    return np.atleast_2d(np.asarray(front, dtype=float))


def igd(reference, approx) -> float:
    """Mean distance from each reference point to its nearest approximation point.

    Raises:
        UndefinedMetric: ``approx`` is empty.
    """
    R = _points(reference)
    A = np.asarray(approx, dtype=float)
    if A.size == 0:
        raise UndefinedMetric("IGD of an empty approximation set")
    A = np.atleast_2d(A)
    if A.shape[1] != R.shape[1]:
        raise ContractViolation(f"objective count mismatch: {R.shape[1]} vs {A.shape[1]}")
    out = 0.0
    for start in range(0, R.shape[0], 4096):
        out += cdist(R[start : start + 4096], A).min(axis=1).sum()
    return float(out / R.shape[0])


def _hv2(P: np.ndarray, ref: np.ndarray) -> float:
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    area = 0.0
    ceiling = ref[1]
    for f1, f2 in P:
        if f2 < ceiling:
            area += (ref[0] - f1) * (ceiling - f2)
            ceiling = f2
    return area


def _hv3(P: np.ndarray, ref: np.ndarray) -> float:
    P = P[np.argsort(P[:, 2], kind="stable")]
    levels = np.append(P[:, 2], ref[2])
    volume = 0.0
    for i in range(P.shape[0]):
        height = levels[i + 1] - levels[i]
        if height > 0:
            volume += _hv2(P[: i + 1, :2], ref[:2]) * height
    return volume


def hypervolume(approx, ref_point) -> float:
    """Exact Lebesgue measure dominated by ``approx`` and bounded by ``ref_point``.

    Only points strictly better than the reference point in every objective
    contribute. Supports two and three objectives.
    """
    ref = np.asarray(ref_point, dtype=float)
    m = ref.shape[0]
    if m not in (2, 3):
        raise UnsupportedOperation(f"hypervolume supports m in {{2, 3}}, got m={m}")
    P = np.asarray(approx, dtype=float)
    if P.size == 0:
        return 0.0
    P = np.atleast_2d(P)
    if P.shape[1] != m:
        raise ContractViolation(f"objective count mismatch: {P.shape[1]} vs {m}")
    P = P[np.all(P < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0
    return float(_hv2(P, ref) if m == 2 else _hv3(P, ref))


def reference_point(front, scale: float = 1.2) -> np.ndarray:
    """``ideal + 1.2 * (nadir - ideal)`` of the true front.

    A coordinate with ``nadir == ideal`` falls back to ``ideal + 1.2e-6`` and
    emits a ``RuntimeWarning``.
    """
    P = _points(front)
    if P.shape[0] == 0:
        raise ContractViolation("reference point of an empty front")
    ideal = P.min(axis=0)
    nadir = P.max(axis=0)
    span = nadir - ideal
    flat = span <= 0
    if flat.any():
        warnings.warn(
            f"degenerate front in objective(s) {np.flatnonzero(flat).tolist()}; using span 1e-6",
            RuntimeWarning,
            stacklevel=2,
        )
        span = np.where(flat, 1e-6, span)
    return ideal + scale * span
