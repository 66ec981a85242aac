"""Train a small policy and compare it against its best baseline.

Uses a reduced environment (8 loci, 30 agents, 50-step episodes) so that
a learning signal is visible on a laptop in a few minutes. The trained
actor is then evaluated exactly like a baseline strategy.
"""

import numpy as np

from slslab.engine import EpisodeConfig, run_batch
from slslab.topology import complete
from slslab.trainer import TrainConfig, train

env = EpisodeConfig(n_agents=30, sample_size=3, steps=50,
                    n_loci=8, k_inputs=3)
cfg = TrainConfig(env=env, lr_actor=1e-4, lr_critic=3e-4)

# the learning signal is slow but steady; push n_epochs to ~1500 for a
# policy that clearly beats every individual-learning baseline
actor, critic, metrics = train(cfg, seed=0, n_epochs=300, log_every=25)

payoffs = np.array([m["avg_mean_payoff"] for m in metrics])
print(f"\nfirst 25 epochs: {payoffs[:25].mean():.2f}")
print(f"last  25 epochs: {payoffs[-25:].mean():.2f}")

topology = complete(env.n_agents)
for label, strategy in [("PI-R baseline", "PI-R"), ("trained policy", actor)]:
    stats = run_batch(env, topology, strategy, n_landscapes=10,
                      reps_per_landscape=10, seed=99, flags=cfg.flags)
    print(f"{label}: average mean payoff {stats.average_mean_payoff:.2f}")
