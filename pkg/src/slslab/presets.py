"""Named experiment presets.

Each preset is a config fragment: environment, topology, and training
options for the published experiment variants.
"""

from __future__ import annotations

import copy

_DEFAULT = {
    "environment": {
        "n_loci": 15, "k_inputs": 7, "steps": 200,
        "n_agents": 100, "sample_size": 3, "schedule": None,
    },
    "topology": {"kind": "complete"},
    "batch": {"n_landscapes": 50, "reps_per_landscape": 100},
    "training": {},
}


def _variant(**changes):
    preset = copy.deepcopy(_DEFAULT)
    for dotted, value in changes.items():
        node = preset
        *path, last = dotted.split(".")
        for key in path:
            node = node.setdefault(key, {})
        node[last] = value
    return preset


PRESETS = {
    "default": _variant(),
    "maxmc": _variant(**{"topology.kind": "maxmc", "topology.degree": 19,
                         "topology.swap_budget": 200_000}),
    "l50r4": _variant(**{"environment.schedule": {"period": 50, "count": 4}}),
    "k3l400": _variant(**{"environment.k_inputs": 3, "environment.steps": 400}),
    "k11": _variant(**{"environment.k_inputs": 11}),
    "k3k11-e1000": _variant(**{"environment.k_inputs": 3,
                               "training.curriculum": [[0, 3], [1000, 11]]}),
    "k3k11-e2500": _variant(**{"environment.k_inputs": 3,
                               "training.curriculum": [[0, 3], [2500, 11]]}),
    "fixed1": _variant(**{"training.landscape_mode": "fixed_set",
                          "training.fixed_set_size": 1}),
    "fixed10": _variant(**{"training.landscape_mode": "fixed_set",
                           "training.fixed_set_size": 10}),
    "group-reward": _variant(**{"training.reward_scope": "group_averaged"}),
    "pirf": _variant(**{"training.feature_preset": "PIRF"}),
    "pir": _variant(**{"training.feature_preset": "PIR"}),
    "pi": _variant(**{"training.feature_preset": "PI"}),
}


def get(name: str) -> dict:
    key = name.lower()
    if key not in PRESETS:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    return copy.deepcopy(PRESETS[key])
