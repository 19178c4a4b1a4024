"""Reference solvers: k-shortest-path first-fit, and ACO routing followed by first-fit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import accumulate, islice
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .aco import SolveOutcome, SolverConfig, allocation_fitness, ant_rng, roulette, split_ants
from .auxgraph import free_windows
from .network import (DEFAULT_MODULATIONS, Allocation, ModulationTable, NetworkState, Node, Request,
                      link_key, path_length)


@dataclass(frozen=True)
class KspConfig:
    k_paths: int = 3

    def __post_init__(self):
        if self.k_paths < 1:
            raise ValueError("k_paths must be at least 1")


def k_shortest_paths(state: NetworkState, source: Node, target: Node, k: int) -> List[Tuple[Node, ...]]:
    """Up to ``k`` loopless paths in increasing length order (Yen's method via networkx)."""
    gen = nx.shortest_simple_paths(state.topology.graph, source, target, weight="weight")
    return [tuple(p) for p in islice(gen, k)]


def first_fit(state: NetworkState, path: Sequence[Node], slot_count: int) -> Optional[int]:
    """Lowest 1-based start slot whose window is free on every link of ``path``."""
    topo = state.topology
    rows = [topo.index(a, b) for a, b in zip(path, path[1:])]
    union = np.logical_or.reduce(state.grid[rows], axis=0)
    starts = free_windows(union, slot_count)
    return int(starts[0]) if len(starts) else None


def _fit_on_path(state: NetworkState, request: Request, path: Sequence[Node],
                 modtable: ModulationTable) -> Tuple[Optional[Allocation], str]:
    # highest reach-feasible level first, then lower levels on the same path
    length = path_length(state.topology, path)
    levels = [m for m in reversed(modtable.indices) if modtable.within_reach(length, m)]
    if not levels:
        return None, "path exceeds every modulation reach"
    for level in levels:
        count = modtable.slots(request.rate_gbps)[level]
        k = first_fit(state, path, count)
        if k is not None:
            return Allocation(request.id, tuple(path), level, k, count), ""
    return None, "no common free window"


def _outcome(state: NetworkState, alloc: Allocation, iterations=0, ants=0) -> SolveOutcome:
    return SolveOutcome(alloc, None, iterations, allocation_fitness(state, alloc), ants)


def ksp_first_fit(state: NetworkState, request: Request, k_paths: int = 3,
                  modtable: ModulationTable = DEFAULT_MODULATIONS) -> SolveOutcome:
    reason = "no path"
    for path in k_shortest_paths(state, request.source, request.destination, k_paths):
        alloc, reason = _fit_on_path(state, request, path, modtable)
        if alloc is not None:
            return _outcome(state, alloc)
    return SolveOutcome(None, f"{reason} on {k_paths} shortest paths")


def _route_ant(state: NetworkState, source: Node, target: Node, tau: dict, rng) -> Optional[List[Node]]:
    topo = state.topology
    tour, visited = [source], {source}
    cur = source
    while cur != target:
        cands = [u for u in topo.neighbors(cur) if u not in visited]
        if not cands:
            return None
        cur = cands[roulette(list(accumulate(tau[link_key(tour[-1], u)] for u in cands)), rng)]
        tour.append(cur)
        visited.add(cur)
    return tour


def aco_routing_only(state: NetworkState, request: Request, config: SolverConfig = SolverConfig(),
                     modtable: ModulationTable = DEFAULT_MODULATIONS) -> SolveOutcome:
    """Pheromone routing on the plain topology (fitness = path km), then first-fit spectrum."""
    topo = state.topology
    src, dst = request.source, request.destination
    tau = {key: 1.0 / km for key, km in topo.links.items()}
    utau = dict(tau)
    n_ants = math.ceil(config.z * topo.degree(src))
    best, best_len = None, math.inf
    iterations = 0
    for ite in range(1, config.max_iterations + 1):
        iterations = ite
        n_explore, _ = split_ants(n_ants, ite)
        found = []
        for label in range(1, n_ants + 1):
            rng = ant_rng(config.seed, request.id, ite, label)
            tour = _route_ant(state, src, dst, tau if label <= n_explore else utau, rng)
            length = path_length(topo, tour) if tour else math.inf
            found.append((length, tour))
            if tour and (length, tour) < (best_len, best or []):
                best, best_len = tour, length
        for length, tour in found:
            if tour:
                for a, b in zip(tour, tour[1:]):
                    utau[link_key(a, b)] += 1.0 / length
        for key in utau:
            utau[key] *= 1.0 - config.sigma
        if ite >= 2 and sum(1 for f, _ in found if f == best_len) >= config.quorum * n_ants:
            break
    if best is None:
        return SolveOutcome(None, "no route found", iterations, math.inf, n_ants)
    alloc, reason = _fit_on_path(state, request, best, modtable)
    if alloc is None:
        return SolveOutcome(None, reason, iterations, math.inf, n_ants)
    return _outcome(state, alloc, iterations, n_ants)
