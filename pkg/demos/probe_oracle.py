"""Probe a scripted oracle with the payoff-sweep diagnostics.

The oracle copies the best neighbor when it strictly beats the agent's
own payoff and otherwise outputs 0.5 per bit. Its region averages are
(0.5, 0.5, 0.0, 1.0) by construction, which makes it a handy fixture for
checking the probe machinery before pointing it at a real checkpoint.
"""

from slslab.oracles import BestImitatorRandomOracle
from slslab.probe import (canonical_templates, region_averages,
                          voxel_diagram)

N = 15
oracle = BestImitatorRandomOracle(N)

regions = region_averages(oracle, N)
for label, value in zip(["I", "II", "III", "IV"], regions):
    print(f"region {label:>3}: {value:.3f}")

bi_template, _ = canonical_templates(N)
voxels = voxel_diagram(oracle, bi_template, p_0=50, stride=5)
print(f"\nvoxel sweep: {len(voxels['p1'])} cubes")
vivid = (voxels["a"] > 0.25).mean()
print(f"fraction of near-deterministic voxels: {vivid:.2f}")
