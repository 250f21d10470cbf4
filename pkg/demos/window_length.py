"""How the change-rate window l moves the switch point.

The switch fires when neither the ideal nor the nadir point of the
population moved by more than 0.1% over the last l generations. A short
window reacts to a brief plateau; a long window waits for a lasting one.
"""

from pushpull import EngineConfig
from pushpull.harness import sweep_l

base = EngineConfig(N=60, T=20, max_evals=15_000)
rows = sweep_l("deskcmop-partial", [5, 20, 60], base, seeds=[1, 2, 3], n=5)

print("l    switch generations   mean IGD   mean HV")
for r in rows:
    switches = ", ".join("-" if g is None else str(g) for g in r["switch_generations"])
    print(f"{r['l']:<4} {switches:<20} {r['mean_igd']:.4f}     {r['mean_hv']:.4f}")
