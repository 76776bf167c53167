"""Compiled vs. pure-Python kernel on the same scenarios.

Usage: python benchmarks/bench_kernel.py [--duration PS] [--repeat N]

Both backends must produce bit-identical traces; the script checks that and
reports wall time and steps per second for each.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from gcsim import engine, presets
from gcsim.io import scenario_from_dict


def _time(scenario, backend, repeat):
    best = float("inf")
    trace = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = engine.run(scenario, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, trace


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=50_000.0, help="simulated ps per scenario")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    try:
        engine._load_backend("cython")
    except ImportError:
        print("compiled kernel not built; only the Python backend is available")
        return 1

    print(f"{'scenario':22s} {'nodes':>5s} {'steps':>8s} {'cython s':>9s} {'python s':>9s} {'speedup':>8s}  identical")
    for name in ("paper-line4-ahead", "selfstab-line8", "grid-sweep"):
        raw = presets.get(name)
        if raw["kind"] == "sweep":
            raw = dict(presets.get("paper-grid32"), topology={"kind": "grid", "w": 8}, name="grid8")
        scenario = scenario_from_dict(dict(raw, duration=args.duration))
        steps = int(round(scenario.duration / scenario.dt))
        t_c, tr_c = _time(scenario, "cython", args.repeat)
        t_p, tr_p = _time(scenario, "python", 1)
        same = all(
            np.array_equal(getattr(tr_c, f), getattr(tr_p, f)) for f in ("times", "L", "H", "signal", "effective")
        ) and tr_c.events == tr_p.events
        print(f"{scenario.name:22s} {scenario.topology.n:5d} {steps:8d} {t_c:9.4f} {t_p:9.3f} {t_p / t_c:8.1f}  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
