"""Weight vectors, neighborhoods and Tchebycheff scalarization."""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from .core import ConfigurationError, ContractViolation

WEIGHT_FLOOR = 1e-6


def _simplex_lattice(m: int, H: int) -> np.ndarray:
    # stars and bars: each combination of m-1 bar positions among H+m-1 slots
    rows = []
    for bars in combinations(range(H + m - 1), m - 1):
        cuts = (-1,) + bars + (H + m - 1,)
        rows.append([cuts[i + 1] - cuts[i] - 1 for i in range(m)])
    W = np.array(rows, dtype=float) / H
    order = np.lexsort(W.T[::-1])
    return W[order]


def generate_weights(m: int, N: int) -> np.ndarray:
    """Return ``N`` weight vectors on the unit simplex, sorted lexicographically.

    Uses the smallest simplex lattice with at least ``N`` points and keeps the
    first ``N`` rows. For ``m = 2`` this is exactly ``N`` evenly spaced
    vectors ``(i/(N-1), 1 - i/(N-1))``.
    """
    if m < 2:
        raise ConfigurationError(f"need at least two objectives, got m={m}")
    if N < m:
        raise ConfigurationError(f"population size N={N} is smaller than m={m}")
    H = 1
    while comb(H + m - 1, m - 1) < N:
        H += 1
    W = _simplex_lattice(m, H)[:N]
    if m == 2:
        # exact endpoints and spacing, no accumulated rounding
        t = np.arange(N) / (N - 1)
        W = np.column_stack([t, 1.0 - t]) if H == N - 1 else W
    return W


def build_neighborhoods(weights, T: int) -> np.ndarray:
    """Indices of the ``T`` closest weight vectors for every weight vector.

    Row ``i`` is sorted by Euclidean distance with ties broken by the smaller
    index, so it always starts with ``i`` itself.
    """
    W = np.asarray(weights, dtype=float)
    N = W.shape[0]
    if not 1 <= T <= N:
        raise ConfigurationError(f"neighborhood size T={T} must lie in [1, {N}]")
    d = np.sqrt(((W[:, None, :] - W[None, :, :]) ** 2).sum(axis=2))
    return np.argsort(d, axis=1, kind="stable")[:, :T]


def _as_list(v) -> list:
    return v.tolist() if isinstance(v, np.ndarray) else [float(c) for c in v]


def _tchebycheff_lists(f: list, w: list, z: list) -> float:
    if not len(f) == len(w) == len(z):
        raise ContractViolation(f"length mismatch: f({len(f)}), weight({len(w)}), ideal({len(z)})")
    best = 0.0
    for fj, wj, zj in zip(f, w, z):
        v = abs(fj - zj) / (wj if wj > WEIGHT_FLOOR else WEIGHT_FLOOR)
        if v > best:
            best = v
    return best


def tchebycheff(f, weight, ideal) -> float:
    """``max_j |f_j - z_j| / max(w_j, 1e-6)``."""
    # plain floats: this is called per comparison on short vectors
    return _tchebycheff_lists(_as_list(f), _as_list(weight), _as_list(ideal))


def tchebycheff_many(F, W, ideal) -> np.ndarray:
    """Row-wise Tchebycheff values for objective rows ``F`` against weights ``W``.

    Either argument may be a single row; it is broadcast against the other.
    """
    F = np.asarray(F, dtype=float)
    W = np.asarray(W, dtype=float)
    return np.max(np.abs(F - ideal) / np.maximum(W, WEIGHT_FLOOR), axis=-1)
