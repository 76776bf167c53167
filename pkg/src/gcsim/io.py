"""Scenario files, trace CSVs and summary JSON.

A scenario file is one JSON object. ``"preset": "<name>"`` inherits from a
shipped preset (or from another file, given a path ending in ``.json``);
keys in the file override the inherited ones, with nested objects merged.
Omitted keys take the :class:`~gcsim.engine.Scenario` defaults.
"""
from __future__ import annotations

import copy
import csv
import json
import os
from pathlib import Path

import numpy as np

from gcsim import presets
from gcsim.drift import DriftSchedule
from gcsim.engine import Scenario, initial_local_skew
from gcsim.params import InvalidArgument, ParamSet
from gcsim.summary import RunSummary
from gcsim.topology import Topology
from gcsim.trace import SkewTrace

TRACE_MAGIC = "# gcsim-trace v1 "
OUT_DIR_ENV = "GCSIM_OUT_DIR"
SCENARIO_KEYS = (
    "name", "params", "topology", "initial_offsets", "drift", "controller", "policy",
    "duration", "dt", "seed", "stride", "jitter", "measurement_latency", "record_codes",
)
# keys that describe a preset rather than a run
_META_KEYS = ("preset", "kind", "description")
MODE_SYMBOLS = ("0", "M", "1")
EFFECTIVE_NAMES = ("slow", "transitioning", "fast")


class ConfigError(InvalidArgument):
    """Malformed or invalid configuration; the message names the file location or field."""


def out_dir(default: str | os.PathLike = ".") -> Path:
    """Default output directory, from ``GCSIM_OUT_DIR`` when set."""
    return Path(os.environ.get(OUT_DIR_ENV) or default)


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def read_json(path: str | os.PathLike):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def resolve(data: dict, base_dir: Path | None = None, _seen: tuple = ()) -> dict:
    """Follow the ``preset`` chain and return the fully merged dict."""
    if not isinstance(data, dict):
        raise ConfigError(f"configuration must be a JSON object, got {type(data).__name__}")
    ref = data.get("preset")
    if ref is None:
        return dict(data)
    if not isinstance(ref, str):
        raise ConfigError(f"field 'preset' must be a string, got {ref!r}")
    if ref in _seen:
        raise ConfigError(f"field 'preset': inheritance cycle through {ref!r}")
    if ref.endswith(".json"):
        path = Path(ref) if base_dir is None else base_dir / ref
        parent = resolve(read_json(path), path.parent, _seen + (ref,))
    else:
        try:
            parent = resolve(presets.get(ref), None, _seen + (ref,))
        except ConfigError:
            raise
        except InvalidArgument as exc:
            raise ConfigError(f"field 'preset': {exc}") from None
    child = {k: v for k, v in data.items() if k != "preset"}
    merged = deep_merge(parent, child)
    merged.pop("preset", None)
    return merged


def random_offsets(n: int, spec: dict, seed: int) -> tuple[float, ...]:
    """Seeded offsets: ``spread`` draws uniformly from ``[0, spread]``;
    ``global_skew`` rescales the draw so that ``max - min`` equals it exactly."""
    unknown = sorted(set(spec) - {"kind", "spread", "global_skew", "seed"})
    if unknown:
        raise ConfigError(f"field 'initial_offsets': unknown key(s) {', '.join(unknown)}")
    if spec.get("kind", "random") != "random":
        raise ConfigError(f"field 'initial_offsets.kind': unknown generator {spec.get('kind')!r}")
    own = spec.get("seed")
    rng = np.random.default_rng([int(seed if own is None else own) & 0xFFFFFFFF, 0x0FF])
    u = rng.random(n)
    if "global_skew" in spec:
        g = float(spec["global_skew"])
        if n < 2:
            return (0.0,) * n
        u = (u - u.min()) / (u.max() - u.min())
        return tuple(float(x) for x in u * g)
    if "spread" in spec:
        return tuple(float(x) for x in u * float(spec["spread"]))
    raise ConfigError("field 'initial_offsets': random offsets need 'spread' or 'global_skew'")


def _field(name: str, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (InvalidArgument, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"field '{name}': {exc}") from None


def scenario_from_dict(data: dict, base_dir: Path | None = None, check: bool = True) -> Scenario:
    """Build a scenario from a (possibly inheriting) dict; rejects invalid ones."""
    data = resolve(data, base_dir)
    kind = data.get("kind", "scenario")
    if kind != "scenario":
        raise ConfigError(f"field 'kind': expected a scenario, got {kind!r}")
    unknown = sorted(set(data) - set(SCENARIO_KEYS) - set(_META_KEYS))
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
    if "topology" not in data:
        raise ConfigError("field 'topology' is required")
    topo = _field("topology", Topology.from_dict, data["topology"])
    seed = _field("seed", int, data.get("seed", 0))

    raw_offsets = data.get("initial_offsets")
    if raw_offsets is None:
        offsets = (0.0,) * topo.n
    elif isinstance(raw_offsets, dict):
        offsets = random_offsets(topo.n, raw_offsets, seed)
    else:
        offsets = _field("initial_offsets", lambda xs: tuple(float(x) for x in xs), raw_offsets)

    raw_params = dict(data.get("params") or {})
    if not isinstance(data.get("params", {}), dict):
        raise ConfigError("field 'params' must be an object")
    if raw_params.get("init_skew_bound") == "auto":
        raw_params["init_skew_bound"] = initial_local_skew(topo, offsets)
    params = _field("params", ParamSet.from_dict, raw_params)

    raw_drift = data.get("drift", {})
    if isinstance(raw_drift, dict):
        drift = (_field("drift", DriftSchedule.from_dict, raw_drift),)
    else:
        drift = tuple(_field(f"drift[{i}]", DriftSchedule.from_dict, d) for i, d in enumerate(raw_drift))

    duration = data.get("duration")
    kwargs = {k: data[k] for k in ("controller", "policy", "dt", "stride", "jitter",
                                   "measurement_latency", "record_codes", "name") if k in data}
    scenario = _field("scenario", lambda: Scenario(
        params=params, topology=topo, initial_offsets=offsets, drift=drift,
        duration=None if duration in (None, "auto") else float(duration), seed=seed, **kwargs,
    ))
    if check:
        problems = scenario.problems()
        if problems:
            raise ConfigError("invalid scenario: " + "; ".join(problems))
    return scenario


def load_scenario(path: str | os.PathLike) -> Scenario:
    path = Path(path)
    data = read_json(path)
    try:
        return scenario_from_dict(data, path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def scenario_json(scenario: Scenario) -> str:
    return json.dumps(scenario.to_dict(), sort_keys=True, indent=2) + "\n"


def save_scenario(scenario: Scenario, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.write_text(scenario_json(scenario))
    return path


def trace_columns(n: int) -> list[str]:
    cols = ["t_ps"]
    for v in range(n):
        cols += [f"L{v}", f"H{v}", f"mode{v}", f"eff{v}"]
    return cols


def write_trace(trace: SkewTrace, path: str | os.PathLike) -> Path:
    """CSV time series; the first line carries the metadata as JSON."""
    path = Path(path)
    meta = {
        "n": trace.n,
        "dt": trace.dt,
        "params": trace.params.to_dict(),
        "topology": trace.topology.to_dict(),
        "scenario_hash": trace.meta.get("scenario_hash", ""),
        "backend": trace.meta.get("backend", ""),
        "events": [list(e) for e in trace.events],
    }
    n = trace.n
    with path.open("w", newline="") as fh:
        fh.write(TRACE_MAGIC + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trace_columns(n))
        for j, t in enumerate(trace.times):
            row = [repr(float(t))]
            L, H, sig, eff = trace.L[j], trace.H[j], trace.signal[j], trace.effective[j]
            for v in range(n):
                row += [repr(float(L[v])), repr(float(H[v])), MODE_SYMBOLS[sig[v]], EFFECTIVE_NAMES[eff[v]]]
            writer.writerow(row)
    return path


def read_trace(path: str | os.PathLike) -> SkewTrace:
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    with fh:
        first = fh.readline()
        if not first.startswith(TRACE_MAGIC):
            raise ConfigError(f"{path}:1: missing '{TRACE_MAGIC.strip()}' header")
        try:
            meta = json.loads(first[len(TRACE_MAGIC):])
            n = int(meta["n"])
            params = ParamSet.from_dict(meta["params"])
            topo = Topology.from_dict(meta["topology"])
            dt = float(meta["dt"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}:1: bad trace metadata ({exc})") from None
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != trace_columns(n):
            raise ConfigError(f"{path}:2: column header does not match {n} nodes")
        times, L, H, sig, eff = [], [], [], [], []
        for lineno, row in enumerate(reader, start=3):
            if len(row) != 1 + 4 * n:
                raise ConfigError(f"{path}:{lineno}: expected {1 + 4 * n} fields, got {len(row)}")
            try:
                times.append(float(row[0]))
                L.append([float(x) for x in row[1::4]])
                H.append([float(x) for x in row[2::4]])
                sig.append([MODE_SYMBOLS.index(x) for x in row[3::4]])
                eff.append([EFFECTIVE_NAMES.index(x) for x in row[4::4]])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    try:
        return SkewTrace(
            times=np.asarray(times, dtype=float),
            L=np.asarray(L, dtype=float).reshape(len(times), n),
            H=np.asarray(H, dtype=float).reshape(len(times), n),
            signal=np.asarray(sig, dtype=np.int8).reshape(len(times), n),
            effective=np.asarray(eff, dtype=np.int8).reshape(len(times), n),
            topology=topo, params=params, dt=dt,
            events=tuple((float(t), int(v), int(s)) for t, v, s in meta.get("events", [])),
            meta={"scenario_hash": meta.get("scenario_hash", ""), "backend": meta.get("backend", "")},
        )
    except InvalidArgument as exc:
        raise ConfigError(f"{path}: {exc}") from None


def summary_json(summary: RunSummary) -> str:
    return json.dumps(summary.to_dict(), sort_keys=True, indent=2) + "\n"


def write_summary(summary: RunSummary, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.write_text(summary_json(summary))
    return path


def read_summary(path: str | os.PathLike) -> RunSummary:
    data = read_json(path)
    try:
        return RunSummary.from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
