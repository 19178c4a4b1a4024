"""Exhaustive reference solver for small instances.

Enumerates every simple path, modulation level and free contiguous window,
scoring each with fragment counts taken before and after a hypothetical
allocation rather than with the ants' boundary rule.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from .aco import path_fitness, selection_key
from .network import DEFAULT_MODULATIONS, ModulationTable, NetworkState, Node, Request, path_length


class InstanceTooLarge(ValueError):
    pass


class OracleSolution(NamedTuple):
    path: Tuple[Node, ...]
    level: int
    start_fsu: int
    slot_count: int
    fitness: object
    dis: float


def count_fragments(row: Sequence[bool]) -> int:
    """Number of maximal runs of free slots."""
    runs, prev_free = 0, False
    for busy in row:
        free = not busy
        if free and not prev_free:
            runs += 1
        prev_free = free
    return runs


def fragment_delta(row: Sequence[bool], start_fsu: int, slot_count: int) -> int:
    after = list(row)
    for q in range(start_fsu - 1, start_fsu - 1 + slot_count):
        after[q] = True
    return count_fragments(after) - count_fragments(row)


def oracle_solve(state: NetworkState, request: Request,
                 modtable: ModulationTable = DEFAULT_MODULATIONS,
                 max_nodes: int = 10) -> Optional[OracleSolution]:
    topo = state.topology
    if len(topo.nodes) > max_nodes:
        raise InstanceTooLarge(f"{len(topo.nodes)} nodes exceeds the oracle limit of {max_nodes}")
    fs = modtable.slots(request.rate_gbps)
    best, best_key = None, None
    for path in nx.all_simple_paths(topo.graph, request.source, request.destination):
        dis = path_length(topo, path)
        rows = [state.link_occupancy(a, b).tolist() for a, b in zip(path, path[1:])]
        for level in modtable.indices:
            if not modtable.within_reach(dis, level):
                continue
            count = fs[level]
            for k in range(1, topo.slots - count + 2):
                if any(any(r[k - 1:k - 1 + count]) for r in rows):
                    continue
                delta = sum(fragment_delta(r, k, count) for r in rows)
                fit = path_fitness(delta, len(path) - 1, count)
                key = selection_key(fit, k, dis, path, level)
                if best_key is None or key < best_key:
                    best_key = key
                    best = OracleSolution(tuple(path), level, k, count, fit, dis)
    return best
