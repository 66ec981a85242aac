"""Run a small baseline tournament and print a ranked table.

A scaled-down version of the default experiment: every baseline strategy
plays the same batch of seeded NK landscapes on a complete network, and
strategies are ranked by average mean payoff over the whole episode.
Scale up n_landscapes / reps_per_landscape for publication-grade numbers.
"""

from slslab.engine import EpisodeConfig, run_batch
from slslab.strategies import ALL_BASELINES
from slslab.topology import complete

config = EpisodeConfig(n_agents=100, sample_size=3, steps=200,
                       n_loci=15, k_inputs=7)
topology = complete(config.n_agents)

rows = []
for name in ALL_BASELINES:
    stats = run_batch(config, topology, name,
                      n_landscapes=5, reps_per_landscape=10, seed=0)
    rows.append((stats.average_mean_payoff, stats.final_mean_payoff, name))
    print(f"finished {name}")

rows.sort(reverse=True)
print(f"\n{'rank':>4}  {'strategy':<8} {'avg':>7} {'final':>7}")
for rank, (avg, final, name) in enumerate(rows, 1):
    print(f"{rank:>4}  {name:<8} {avg:7.2f} {final:7.2f}")
