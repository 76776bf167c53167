"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 a monitor or bound
was violated.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from gcsim import clocktree, engine, presets
from gcsim.analysis import monitor_suite
from gcsim.bounds import bound_report
from gcsim.io import (
    ConfigError, deep_merge, out_dir, read_json, read_trace, resolve, scenario_from_dict,
    write_summary, write_trace,
)
from gcsim.params import InvalidArgument, ParamSet, validate
from gcsim.summary import CATCH_UP_MAX_NODES, summarize
from gcsim.topology import Topology

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config(args) -> dict:
    """Merged configuration dict from ``--preset`` and/or ``--config``."""
    if args.preset is None and args.config is None:
        raise ConfigError("give --preset NAME or --config FILE")
    data: dict = {}
    base_dir = None
    if args.config is not None:
        data = read_json(args.config)
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: configuration must be a JSON object")
        base_dir = Path(args.config).parent
    if args.preset is not None:
        data = dict(data, preset=args.preset)
    return resolve(data, base_dir)


def _overrides(args) -> dict:
    out = {}
    for key in ("seed", "dt", "duration"):
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def _scenario_dict(data: dict, args) -> dict:
    data = dict(data, **_overrides(args))
    if args.dt is not None:
        data.pop("stride", None)
    return data


def _summary_line(s) -> str:
    conv = "-" if s.convergence_time is None else f"{s.convergence_time:.0f}"
    status = "ok" if s.passed else "VIOLATION " + ", ".join(s.failures())
    return (f"{s.name or s.scenario_hash[:12]}: local max {s.max_local_skew:.3f} ps, "
            f"final {s.final_local_skew:.3f} ps, global max {s.max_global_skew:.3f} ps, "
            f"converged at {conv} ps, metastable {s.metastable_events}: {status}")


def cmd_simulate(args) -> int:
    data = _scenario_dict(_config(args), args)
    if args.controller is not None:
        data["controller"] = args.controller
    scenario = scenario_from_dict(data)
    trace = engine.run(scenario, backend=args.backend)
    summary = summarize(scenario, trace, monitors=not args.no_monitors)
    name = scenario.name or scenario.digest()[:12]
    trace_path = Path(args.out) if args.out else out_dir() / f"{name}.csv"
    trace_path.parent.mkdir(parents=True, exist_ok=True)
    write_trace(trace, trace_path)
    summary_path = Path(args.summary) if args.summary else trace_path.with_suffix(".summary.json")
    write_summary(summary, summary_path)
    print(_summary_line(summary))
    print(f"trace: {trace_path}\nsummary: {summary_path}")
    return EXIT_OK if summary.passed else EXIT_VIOLATION


def _sweep_scenarios(data: dict, args) -> list:
    if data.get("kind") == "sweep":
        base = resolve(data.get("base", {}))
        variants = data.get("variants", [])
        if not isinstance(variants, list):
            raise ConfigError("field 'variants' must be a list")
        dicts = [_merge_variant(base, resolve(v)) for v in variants]
    else:
        dicts = [data]
    seeds = args.seeds
    if seeds:
        dicts = [dict(d, seed=s, name=f"{d.get('name', 'run')}-seed{s}") for d in dicts for s in seeds]
    return [scenario_from_dict(_scenario_dict(d, args)) for d in dicts]


def _merge_variant(base: dict, variant: dict) -> dict:
    merged = deep_merge(base, variant)
    for key in ("kind", "description"):
        merged.pop(key, None)
    return merged


def cmd_sweep(args) -> int:
    scenarios = _sweep_scenarios(_config(args), args)
    summaries = engine.sweep(scenarios, workers=args.workers)
    target = Path(args.out) if args.out else out_dir()
    target.mkdir(parents=True, exist_ok=True)
    for i, s in enumerate(summaries):
        write_summary(s, target / f"{i:03d}-{s.name or s.scenario_hash[:12]}.summary.json")
        print(_summary_line(s))
    return EXIT_OK if all(s.passed for s in summaries) else EXIT_VIOLATION


def _params_and_diameter(args) -> tuple[ParamSet, int]:
    data = _config(args)
    raw = dict(data.get("params") or {})
    if raw.get("init_skew_bound") == "auto":
        raw.pop("init_skew_bound")
    try:
        params = ParamSet.from_dict(raw)
    except (InvalidArgument, TypeError) as exc:
        raise ConfigError(f"field 'params': {exc}") from None
    if args.diameter is not None:
        diameter = args.diameter
    elif "topology" in data:
        try:
            diameter = Topology.from_dict(data["topology"]).diameter
        except (InvalidArgument, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field 'topology': {exc}") from None
    else:
        raise ConfigError("no topology in the configuration; give --diameter")
    problems = validate(params)
    if problems:
        raise ConfigError("invalid parameters: " + "; ".join(problems))
    return params, diameter


def cmd_bounds(args) -> int:
    params, diameter = _params_and_diameter(args)
    report = bound_report(params, diameter, g0=args.g0)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
        return EXIT_OK
    print(f"diameter D             {report.diameter}")
    print(f"delta                  {report.delta:.6f} ps (kappa must exceed {report.kappa_min:.6f} ps)")
    print(f"global skew bound      {report.global_bound:.6f} ps")
    print(f"local skew bound       {report.local_bound:.6f} ps")
    print(f"levels needed          {report.levels_needed}")
    print(f"initial level s0       {report.initial_level}")
    print(f"global bound (from s0) {report.global_bound_all_times:.6f} ps")
    print(f"local bound (from s0)  {report.local_bound_all_times:.6f} ps")
    conv = "inf" if math.isinf(report.convergence_time) else f"{report.convergence_time:.1f} ps"
    print(f"convergence time       {conv}")
    return EXIT_OK


def cmd_clocktree(args) -> int:
    cfg: dict = {}
    if args.preset is not None or args.config is not None:
        cfg = _config(args)
        if cfg.get("kind", "clocktree") != "clocktree":
            raise ConfigError(f"field 'kind': expected a clocktree configuration, got {cfg.get('kind')!r}")
    w_list = args.w if args.w is not None else cfg.get("w_list", [4, 8, 16, 32])
    nominal = args.nominal if args.nominal is not None else cfg.get("nominal_edge_delay", 50.0)
    p = args.p if args.p is not None else cfg.get("p", 0.05)
    strategy = args.strategy or cfg.get("strategy", "low-stretch-recursive")
    try:
        params = ParamSet.from_dict(cfg.get("params", presets.GRID_PARAMS))
    except (InvalidArgument, TypeError) as exc:
        raise ConfigError(f"field 'params': {exc}") from None
    rows = clocktree.compare_curves(w_list, params, nominal, p, strategy)
    text = clocktree.curves_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    trace = read_trace(args.trace)
    verdicts = monitor_suite(trace, catch_up=trace.n <= CATCH_UP_MAX_NODES)
    bad = [v for v in verdicts.values() if not v.passed]
    for v in verdicts.values():
        print(f"{v.name}: {'ok' if v.passed else 'VIOLATED'} ({v.checked} checks)")
    for v in bad:
        for item in v.violations[:5]:
            print(f"  {v.name} violation: {json.dumps(item, sort_keys=True)}")
    if args.json:
        Path(args.json).write_text(json.dumps({k: v.to_dict() for k, v in verdicts.items()}, sort_keys=True, indent=2))
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_presets(args) -> int:
    if args.show:
        try:
            print(json.dumps(resolve(presets.get(args.show)), sort_keys=True, indent=2))
        except InvalidArgument as exc:
            raise ConfigError(str(exc)) from None
        return EXIT_OK
    for name in presets.names():
        p = presets.get(name)
        print(f"{name:20s} {p.get('kind', 'scenario'):10s} {p.get('description', '')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gcsim", description="Gradient clock synchronization simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def source(p):
        p.add_argument("--preset", help="shipped preset name (see `gcsim presets`)")
        p.add_argument("--config", help="scenario JSON file")

    def run_flags(p):
        p.add_argument("--seed", type=int)
        p.add_argument("--dt", type=float, help="integration step (ps)")
        p.add_argument("--duration", type=float, help="simulated time (ps)")
        p.add_argument("--backend", choices=("auto", "cython", "python"))

    p = sub.add_parser("simulate", help="run one scenario, write trace CSV and summary JSON")
    source(p)
    run_flags(p)
    p.add_argument("--controller", choices=engine.CONTROLLERS)
    p.add_argument("--out", help="trace CSV path (default: $GCSIM_OUT_DIR/<name>.csv)")
    p.add_argument("--summary", help="summary JSON path (default: next to the trace)")
    p.add_argument("--no-monitors", action="store_true", help="skip the trace monitors")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a sweep preset or a scenario over several seeds")
    source(p)
    run_flags(p)
    p.add_argument("--seeds", type=int, nargs="+", help="run every scenario once per seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="directory for the summaries (default: $GCSIM_OUT_DIR)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="print the closed-form skew bounds")
    source(p)
    p.add_argument("--diameter", type=int, help="override the topology diameter")
    p.add_argument("--g0", type=float, help="initial global skew for the convergence time (ps)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("clocktree", help="tree skew vs. synchronization bound table (CSV)")
    source(p)
    p.add_argument("--w", type=int, nargs="+", help="grid widths")
    p.add_argument("--nominal", type=float, help="nominal delay per grid pitch (ps)")
    p.add_argument("--p", type=float, help="relative delay variation")
    p.add_argument("--strategy", choices=clocktree.STRATEGIES)
    p.add_argument("--out", help="also write the CSV here")
    p.set_defaults(func=cmd_clocktree)

    p = sub.add_parser("check", help="run the monitors on a trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--json", help="write the verdicts here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("presets", help="list shipped presets")
    p.add_argument("--show", metavar="NAME", help="print one preset, inheritance resolved")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidArgument as exc:
        print(f"gcsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
