"""Offspring generation: DE/rand/1/bin with midpoint repair, polynomial mutation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, ContractViolation


@dataclass(frozen=True)
class VariationConfig:
    de_f: float = 0.5
    de_cr: float = 1.0
    pm: float | None = None  # None means 1/n
    eta_m: float = 20.0

    def __post_init__(self):
        if not self.de_f > 0:
            raise ConfigurationError(f"de_f must be positive, got {self.de_f}")
        if not 0.0 <= self.de_cr <= 1.0:
            raise ConfigurationError(f"de_cr must lie in [0, 1], got {self.de_cr}")
        if self.pm is not None and not 0.0 <= self.pm <= 1.0:
            raise ConfigurationError(f"pm must lie in [0, 1], got {self.pm}")
        if not self.eta_m > 0:
            raise ConfigurationError(f"eta_m must be positive, got {self.eta_m}")

    def mutation_rate(self, n: int) -> float:
        return 1.0 / n if self.pm is None else self.pm


def _box(bound, n):
    if isinstance(bound, np.ndarray) and bound.ndim == 1:
        return bound
    bound = np.asarray(bound, dtype=float)
    return np.full(n, float(bound)) if bound.ndim == 0 else bound


def de_offspring(base, r1, r2, cfg: VariationConfig, rng, lower=0.0, upper=1.0) -> np.ndarray:
    """Trial vector ``base + F * (r1 - r2)`` under binomial crossover.

    Crossover takes each coordinate from the trial vector with probability
    ``cfg.de_cr`` and always takes one uniformly chosen coordinate. A
    coordinate that leaves the box is reset halfway between ``base`` and the
    violated bound.

    Random draws, in order: ``n`` uniforms for the crossover mask, then one
    integer for the forced coordinate.
    """
    base = np.asarray(base, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if not base.shape == r1.shape == r2.shape:
        raise ContractViolation(f"dimension mismatch: {base.shape}, {r1.shape}, {r2.shape}")
    n = base.shape[0]
    lo = _box(lower, n).tolist()
    hi = _box(upper, n).tolist()

    take = (rng.random(n) < cfg.de_cr).tolist()
    take[int(rng.integers(n))] = True
    b, a1, a2 = base.tolist(), r1.tolist(), r2.tolist()
    scale = cfg.de_f
    out = b[:]
    for d in range(n):
        if take[d]:
            v = b[d] + scale * (a1[d] - a2[d])
            if v < lo[d]:
                v = 0.5 * (b[d] + lo[d])
            elif v > hi[d]:
                v = 0.5 * (b[d] + hi[d])
            out[d] = v
    return np.array(out)


def polynomial_mutation(x, cfg: VariationConfig, rng, lower=0.0, upper=1.0) -> np.ndarray:
    """Bounded polynomial mutation with distribution index ``cfg.eta_m``.

    Each coordinate mutates independently with probability
    ``cfg.mutation_rate(n)``. Random draws, in order: ``n`` uniforms deciding
    which coordinates mutate, then ``n`` uniforms for the perturbations (drawn
    for every coordinate so the stream does not depend on the mask).
    """
    x = np.array(x, dtype=float)
    n = x.shape[0]
    mutate = np.flatnonzero(rng.random(n) < cfg.mutation_rate(n)).tolist()
    u = rng.random(n)
    if not mutate:
        return x
    lo = _box(lower, n)
    hi = _box(upper, n)
    eta1 = cfg.eta_m + 1.0
    power = 1.0 / eta1
    for d in mutate:
        xd, ld, hd, ud = float(x[d]), float(lo[d]), float(hi[d]), float(u[d])
        span = hd - ld
        if ud <= 0.5:
            val = 2.0 * ud + (1.0 - 2.0 * ud) * ((hd - xd) / span) ** eta1
            delta = val**power - 1.0
        else:
            val = 2.0 * (1.0 - ud) + 2.0 * (ud - 0.5) * ((xd - ld) / span) ** eta1
            delta = 1.0 - val**power
        x[d] = min(max(xd + delta * span, ld), hd)
    return x
