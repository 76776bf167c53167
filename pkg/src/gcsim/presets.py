"""Shipped configurations.

Every preset is a plain dict in the scenario-file format, so a file can
inherit from it with ``{"preset": "<name>", ...}``. ``kind`` says what the
preset describes: a single ``scenario``, a ``sweep`` over scenario
variants, a bare ``params`` set (with a topology for the diameter), or a
``clocktree`` comparison.
"""
from __future__ import annotations

import copy

from gcsim.params import InvalidArgument

HARDWARE_PARAMS = {
    "rho": 1e-5, "mu": 1e-4, "kappa": 10.0, "delta0": 4.0, "epsilon": 1.0,
    "t_meas": 500.0, "t_cnt": 25.0, "t_osc": 250.0, "period": 500.0,
}
GRID_PARAMS = dict(HARDWARE_PARAMS, mu=1e-3)

_PRESETS: dict[str, dict] = {
    "hardware-params": {
        "kind": "params",
        "description": "2 GHz hardware parameters (mu = 10 rho) on the 4-node line",
        "params": HARDWARE_PARAMS,
        "topology": {"kind": "line", "n": 4},
    },
    "paper-line4-ahead": {
        "kind": "scenario",
        "description": "4-node line, node 1 starts 40 ps ahead, TDC controller, 1000 ns",
        "name": "line4-ahead",
        "params": dict(HARDWARE_PARAMS, init_skew_bound=40.0),
        "topology": {"kind": "line", "n": 4},
        "initial_offsets": [0.0, 40.0, 0.0, 0.0],
        "drift": {"kind": "constant"},
        "controller": "hardware",
        "policy": "linear",
        "duration": 1_000_000.0,
        "dt": 1.0,
        "seed": 1,
    },
    "paper-line4-behind": {
        "kind": "scenario",
        "preset": "paper-line4-ahead",
        "description": "4-node line, node 1 starts 40 ps behind, TDC controller, 600 ns",
        "name": "line4-behind",
        "initial_offsets": [0.0, -40.0, 0.0, 0.0],
        "duration": 600_000.0,
    },
    "paper-grid32": {
        "kind": "scenario",
        "description": "32x32 grid with mu = 1e-3, offsets within one kappa, 20 ns",
        "name": "grid32",
        "params": GRID_PARAMS,
        "topology": {"kind": "grid", "w": 32},
        "initial_offsets": {"kind": "random", "spread": 10.0},
        "drift": {"kind": "constant"},
        "controller": "hardware",
        "duration": 20_000.0,
        "dt": 1.0,
        "seed": 1,
    },
    "grid-sweep": {
        "kind": "sweep",
        "description": "grids W = 4, 8, 16, 32 under the grid parameters (short runs)",
        "base": {"preset": "paper-grid32"},
        "variants": [
            {"name": f"grid{w}", "topology": {"kind": "grid", "w": w}} for w in (4, 8, 16, 32)
        ],
    },
    "selfstab-line8": {
        "kind": "scenario",
        "description": "8-node line from random offsets with global skew 10 kappa D",
        "name": "selfstab-line8",
        "params": dict(GRID_PARAMS, init_skew_bound="auto"),
        "topology": {"kind": "line", "n": 8},
        "initial_offsets": {"kind": "random", "global_skew": 700.0},
        "drift": {"kind": "constant"},
        "controller": "hardware",
        "duration": 6_500_000.0,
        "dt": 1.0,
        "seed": 0,
    },
    "clocktree-grid": {
        "kind": "clocktree",
        "description": "tree worst-case local skew vs. synchronization bound, W = 4..32",
        "params": GRID_PARAMS,
        "w_list": [4, 8, 16, 32],
        "nominal_edge_delay": 50.0,
        "p": 0.05,
        "strategy": "low-stretch-recursive",
    },
}


def names() -> list[str]:
    return sorted(_PRESETS)


def get(name: str) -> dict:
    """Deep copy of the raw preset (inheritance not yet resolved)."""
    try:
        return copy.deepcopy(_PRESETS[name])
    except KeyError:
        raise InvalidArgument(f"unknown preset {name!r}; available: {', '.join(names())}") from None
