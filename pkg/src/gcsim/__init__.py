"""Simulator and analysis toolkit for offset-based gradient clock synchronization."""
from gcsim.bounds import bound_report, delta_from, skew_bounds
from gcsim.engine import Scenario, backend_name, run, sweep
from gcsim.params import InvalidArgument, ParamSet, validate
from gcsim.summary import RunSummary, summarize
from gcsim.topology import Topology, build_grid, build_line
from gcsim.trace import SkewTrace

__version__ = "0.1.0"

__all__ = [
    "InvalidArgument", "ParamSet", "RunSummary", "Scenario", "SkewTrace", "Topology",
    "backend_name", "bound_report", "build_grid", "build_line", "delta_from", "run",
    "skew_bounds", "summarize", "sweep", "validate",
]
