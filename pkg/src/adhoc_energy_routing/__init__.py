"""Discrete-event simulator for energy-aware ad hoc routing."""
from __future__ import annotations


__all__ = ['ScenarioConfig', 'load_scenario', 'parse_config', 'run_scenario']

from adhoc_energy_routing.scenario import (
    ScenarioConfig,
    load_scenario,
    parse_config,
)
from adhoc_energy_routing.simulation import run_scenario
