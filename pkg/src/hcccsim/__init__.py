"""Discrete-event simulator of hop-by-hop cross-layer congestion control
(HCCC) in a multi-hop wireless sensor network, with baseline schemes and a
metrics harness."""

__version__ = "0.1.0"

from .config import ScenarioConfig, parse_config, dump_config, validate
from .simulation import Simulation, run_scenario
from .metrics import build_report, aggregate

__all__ = [
    "ScenarioConfig", "parse_config", "dump_config", "validate",
    "Simulation", "run_scenario", "build_report", "aggregate",
]
