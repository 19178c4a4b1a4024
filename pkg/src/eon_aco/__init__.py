"""Ant-colony routing, modulation and spectrum allocation for elastic optical networks."""

from .aco import SolveOutcome, SolverConfig, solve
from .auxgraph import AuxiliaryGraph, build_auxiliary_graph
from .baselines import aco_routing_only, ksp_first_fit
from .io import load_occupancy, load_topology
from .metrics import bandwidth_blocking_probability, network_average_fragmentation
from .network import (DEFAULT_MODULATIONS, Allocation, ModulationTable, NetworkState, Request, Topology,
                      required_slots)
from .traffic import TrafficConfig, run_simulation

__all__ = [
    "Allocation", "AuxiliaryGraph", "DEFAULT_MODULATIONS", "ModulationTable", "NetworkState", "Request",
    "SolveOutcome", "SolverConfig", "Topology", "TrafficConfig", "aco_routing_only",
    "bandwidth_blocking_probability", "build_auxiliary_graph", "ksp_first_fit", "load_occupancy",
    "load_topology", "network_average_fragmentation", "required_slots", "run_simulation", "solve",
]
