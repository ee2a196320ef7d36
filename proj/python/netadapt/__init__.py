"""Adaptive transport networks: graph model, continuum model and consistency checks."""

import json as _json

from ._core import (
    EnergyParams,
    MetabolicForm,
    NetadaptError,
    Network,
    SolverBackend,
    StepMode,
    build_sources,
    cut_bound,
    discrete_energy,
    energy_gradient,
    generate_diamond,
    init_tree,
    run_to_steady_state,
    solve_pressures,
)
from . import _core


def run_scenario(config, output_dir=""):
    """Run one scenario. `config` is a dict or JSON text; returns the report dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_core.run_scenario_json(text, output_dir))


def run_pde(config=None, output_dir=""):
    text = config if isinstance(config, str) else _json.dumps(config or {})
    return _json.loads(_core.run_pde_json(text, output_dir))


def run_bridge_studies(output_dir=""):
    return _json.loads(_core.run_bridge_studies_json(output_dir))


__all__ = [
    "EnergyParams",
    "MetabolicForm",
    "NetadaptError",
    "Network",
    "SolverBackend",
    "StepMode",
    "build_sources",
    "cut_bound",
    "discrete_energy",
    "energy_gradient",
    "generate_diamond",
    "init_tree",
    "run_bridge_studies",
    "run_pde",
    "run_scenario",
    "run_to_steady_state",
    "solve_pressures",
]
