"""Watch one two-stage run on the boundary problem.

The unconstrained front f1 + f2 = 1 of deskcmop-boundary is infeasible; the
feasible front sits on the constraint boundary f1 + f2 = 1.1. The push stage
runs straight to the unconstrained front, then the pull stage drags the
population back up to the boundary.
"""

import numpy as np

from pushpull import EngineConfig, get_problem, run

problem = get_problem("deskcmop-boundary", n=5)
config = EngineConfig(N=100, max_evals=50_000, seed=1)

# keep the mean of f1 + f2 over the population each generation
gap = []
record = run(problem, config, "pps", callback=lambda s: gap.append(float(np.mean(s.F.sum(axis=1)))))

k = record.switch_generation
print(f"switched to pull at generation {k}")
print(f"mean f1+f2 just before the switch: {gap[k - 1]:.4f}  (unconstrained front: 1.0)")
print(f"mean f1+f2 at the end:             {gap[-1]:.4f}  (feasible front: 1.1)")

# epsilon shrinks while the feasible ratio is below alpha, then follows the
# polynomial decay towards zero
print("\ngen   stage  r_k        epsilon    feasible")
for t in record.trace[k - 2 : k + 8] + record.trace[-2:]:
    print(f"{t['gen']:<5} {t['stage']:<6} {t['r_k']:<10.3e} {t['epsilon']:<10.3e} {t['feasible_ratio']:.2f}")

print(f"\narchive: {len(record.archive)} feasible points, IGD {record.final_igd:.4f}, HV {record.final_hv:.4f}")
