"""Compare the two-stage search with the baseline constraint handlers.

Every algorithm runs the same decomposition loop and differs only in the
rule that decides whether a child replaces a neighbour. Seeds are paired, so
run i of each algorithm starts from the same initial population.
"""

from pushpull import EngineConfig, build_comparison_table, get_problem, run

problems = ["deskcmop-block", "deskcmop-boundary", "deskcmop-partial"]
algorithms = ["pps", "cdp", "sr", "epsilon"]
seeds = range(1, 6)  # 30 in a real study; five keep this demo short
# epsilon reaches 0 at 80% of the generation budget, as with the defaults at
# 300 000 evaluations
config = EngineConfig(N=60, T=20, max_evals=12_000, Tc=160)

igd = {}
for prob in problems:
    for alg in algorithms:
        igd[(alg, prob)] = [
            run(get_problem(prob, n=5), config.replace(seed=s), alg).final_igd for s in seeds
        ]
    print(f"finished {prob}")

# a '+' marks a handler significantly worse than pps, '-' significantly better
table = build_comparison_table(igd, baseline="pps", smaller_is_better=True)
print()
print(table.to_text())
print("At this small budget some boundary runs are still pushing when Tc")
print("arrives, so they never pull onto the feasible front. With 50 000")
print("evaluations every run switches in time.")
