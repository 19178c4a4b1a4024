"""Constraint-based ant colony solver on the auxiliary graph.

Each ant picks one auxiliary link at the source, which fixes its neighbor,
modulation level and start slot, then walks the plain topology choosing
next hops by pheromone. A hop is only taken if the fixed slot window is
free on that link and the accumulated length stays inside the level's
reach. Fitness rewards few slot-links first and fragment reduction second.
"""

from __future__ import annotations

import enum
import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .auxgraph import AuxiliaryGraph, build_auxiliary_graph
from .network import (DEFAULT_MODULATIONS, Allocation, LinkKey, ModulationTable, NetworkState, Node,
                      Request, _order, link_key)

Fitness = Union[Fraction, float]


@dataclass(frozen=True)
class SolverConfig:
    z: float = 2.0
    max_iterations: int = 5
    sigma: float = 0.5
    quorum: float = 0.40
    seed: int = 0

    def __post_init__(self):
        if not self.z > 0:
            raise ValueError("z must be positive")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if not 0 < self.quorum <= 1:
            raise ValueError("quorum must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


class AntStatus(str, enum.Enum):
    REACHED = "reached"
    NO_AUX = "blocked-no-aux"
    NO_NODE = "blocked-no-node"
    CONTINUITY = "blocked-continuity"
    REACH = "blocked-reach"


@dataclass
class Ant:
    label: int
    explorer: bool = True
    tour: List[Node] = field(default_factory=list)
    dis: float = 0.0
    start_fsu: Optional[int] = None
    level: Optional[int] = None
    slot_count: Optional[int] = None
    aux_index: Optional[int] = None
    delta_f: int = 0
    status: Optional[AntStatus] = None

    @property
    def reached(self) -> bool:
        return self.status is AntStatus.REACHED

    @property
    def fitness(self) -> Fitness:
        return fitness(self)


@dataclass
class SolveOutcome:
    allocation: Optional[Allocation]
    blocked_reason: Optional[str] = None
    iterations: int = 0
    best_fitness: Fitness = math.inf
    ants: int = 0

    @property
    def allocated(self) -> bool:
        return self.allocation is not None

    def describe(self) -> str:
        if self.allocation is None:
            return f"Blocked: {self.blocked_reason}"
        a = self.allocation
        return (f"Allocated: path={'-'.join(map(str, a.path))} level={a.level} k={a.start_fsu} "
                f"FS={a.slot_count} fitness={float(self.best_fitness):.6f}")


def fragment_change(row: Sequence[bool], start_fsu: int, slot_count: int) -> int:
    """Change in the number of free fragments on one link if the window is occupied.

    ``row`` is the link's occupancy (index 0 is slot 1). Both neighbors busy
    merges the block into existing occupancy (-1); one busy neighbor leaves
    the count unchanged; two free neighbors splits a fragment (+1). The band
    edges count as busy.
    """
    lo = start_fsu - 2
    hi = start_fsu + slot_count - 1
    left = lo < 0 or bool(row[lo])
    right = hi >= len(row) or bool(row[hi])
    return (-1, 0, 1)[2 - (left + right)]


def fitness(ant: Ant) -> Fitness:
    """Exact fitness of a finished ant, ``inf`` if it never reached the destination."""
    if not ant.reached:
        return math.inf
    hops = len(ant.tour) - 1
    return Fraction(ant.delta_f, 2 * hops) + ant.slot_count * hops


def path_fitness(delta_f: int, hops: int, slot_count: int) -> Fraction:
    return Fraction(delta_f, 2 * hops) + slot_count * hops


def allocation_fitness(state: NetworkState, alloc: Allocation) -> Fraction:
    df = sum(fragment_change(state.link_occupancy(a, b), alloc.start_fsu, alloc.slot_count)
             for a, b in zip(alloc.path, alloc.path[1:]))
    return path_fitness(df, alloc.hops, alloc.slot_count)


@dataclass
class PheromoneStore:
    """Initial and learned pheromone on fiber edges and on the auxiliary links.

    ``aux_*`` arrays are aligned with ``AuxiliaryGraph.links``. The initial
    stores are frozen; only the ``u*`` stores are updated.
    """

    edge_tau: Dict[LinkKey, float]
    aux_tau: np.ndarray
    edge_utau: Dict[LinkKey, float]
    aux_utau: np.ndarray

    def view(self, explore: bool) -> Tuple[Dict[LinkKey, float], np.ndarray]:
        return (self.edge_tau, self.aux_tau) if explore else (self.edge_utau, self.aux_utau)


def init_pheromones(aux_graph: AuxiliaryGraph) -> PheromoneStore:
    edge_tau = {key: 1.0 / km for key, km in aux_graph.topology.links.items()}
    aux_tau = 1.0 / (aux_graph.level + aux_graph.start_fsu).astype(float)
    aux_tau.setflags(write=False)
    return PheromoneStore(edge_tau, aux_tau, dict(edge_tau), aux_tau.copy())


def ant_count(aux_graph: AuxiliaryGraph, z: float) -> int:
    return math.ceil(z * aux_graph.effective_degree)


def split_ants(ants: int, iteration: int) -> Tuple[int, int]:
    if iteration < 1:
        raise ValueError("iteration counts from 1")
    explore = -(-ants // iteration)
    return explore, ants - explore


def selection_probabilities(weights: Sequence[float]) -> List[float]:
    total = math.fsum(weights)
    if total <= 0:
        return [0.0] * len(weights)
    return [w / total for w in weights]


def roulette(cumulative: Sequence[float], rng: random.Random) -> int:
    """Index drawn with probability proportional to the increments of ``cumulative``."""
    total = cumulative[-1]
    i = bisect_right(cumulative, rng.random() * total)
    n = len(cumulative)
    # guard the r == total edge and skip any zero-weight tail
    i = min(i, n - 1)
    while i > 0 and cumulative[i] == cumulative[i - 1]:
        i -= 1
    return i


def ant_rng(seed: int, request_id, iteration: int, label: int) -> random.Random:
    return random.Random(f"{seed}:{request_id}:{iteration}:{label}")


def traverse(ant: Ant, aux_graph: AuxiliaryGraph, state: NetworkState,
             edge_tau: Dict[LinkKey, float], aux_cumulative: Sequence[float],
             rng: random.Random, modtable: ModulationTable = DEFAULT_MODULATIONS) -> Ant:
    """Walk one ant from the source until it reaches the destination or is blocked."""
    topo = aux_graph.topology
    src, dst = aux_graph.source, aux_graph.destination
    ant.tour = [src]
    ant.dis = 0.0
    ant.delta_f = 0
    if not len(aux_graph):
        ant.status = AntStatus.NO_AUX
        return ant

    idx = roulette(aux_cumulative, rng)
    aux = aux_graph.link(idx)
    ant.aux_index = idx
    ant.level, ant.start_fsu, ant.slot_count = aux.level, aux.start_fsu, aux.slot_count
    reach = modtable.reach(aux.level)
    lo, hi = aux.start_fsu - 1, aux.start_fsu - 1 + aux.slot_count

    cur, nxt = src, aux.neighbor
    row = state.grid[topo.index(cur, nxt)]
    f_c = fragment_change(row, aux.start_fsu, aux.slot_count)
    visited = {src}
    while True:
        dis = ant.dis + topo.adj[cur][nxt]
        if not dis < reach:
            ant.status = AntStatus.REACH
            return ant
        ant.tour.append(nxt)
        ant.dis = dis
        ant.delta_f += f_c
        visited.add(nxt)
        if nxt == dst:
            ant.status = AntStatus.REACHED
            return ant
        cur = nxt
        candidates = [u for u in topo.neighbors(cur) if u not in visited]
        weights = [edge_tau[link_key(cur, u)] for u in candidates]
        if not candidates or sum(weights) <= 0:
            ant.status = AntStatus.NO_NODE
            return ant
        nxt = candidates[roulette(list(accumulate(weights)), rng)]
        row = state.grid[topo.index(cur, nxt)]
        if row[lo:hi].any():
            ant.status = AntStatus.CONTINUITY
            return ant
        f_c = fragment_change(row, aux.start_fsu, aux.slot_count)


def update_pheromones(store: PheromoneStore, ants: Sequence[Ant], sigma: float) -> PheromoneStore:
    """Deposit ``1/fitness`` along every successful ant's tour and aux link, then evaporate."""
    for ant in ants:
        if not ant.reached:
            continue
        gain = 1.0 / float(fitness(ant))
        for a, b in zip(ant.tour, ant.tour[1:]):
            store.edge_utau[link_key(a, b)] += gain
        store.aux_utau[ant.aux_index] += gain
    keep = 1.0 - sigma
    for key in store.edge_utau:
        store.edge_utau[key] *= keep
    store.aux_utau *= keep
    return store


def selection_key(fit: Fitness, start_fsu: int, dis: float, tour: Sequence[Node], level: int):
    """Order among candidate solutions: fitness, then lowest start slot, shorter path, tour, level."""
    return (fit, start_fsu, dis, tuple(_order(n) for n in tour), level)


def _converged(ants: Sequence[Ant], best: Fitness, quorum: float) -> bool:
    if best == math.inf or not ants:
        return False
    hits = sum(1 for a in ants if a.reached and fitness(a) == best)
    return hits >= quorum * len(ants)


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    label: int
    role: str
    tour: Tuple[Node, ...]
    start_fsu: Optional[int]
    level: Optional[int]
    delta_f: int
    status: str
    fitness: Fitness

    def format(self) -> str:
        fit = "inf" if self.fitness == math.inf else f"{float(self.fitness):.6f}"
        return (f"ite={self.iteration} ant={self.label} {self.role} tour={'-'.join(map(str, self.tour))} "
                f"k={self.start_fsu} m={self.level} dF={self.delta_f} status={self.status} fitness={fit}")


def solve(state: NetworkState, request: Request, config: SolverConfig = SolverConfig(),
          modtable: ModulationTable = DEFAULT_MODULATIONS,
          trace: Optional[List[TraceRecord]] = None) -> SolveOutcome:
    """Find a (path, level, start slot) for ``request``; the caller applies the allocation."""
    aux_graph = build_auxiliary_graph(state, request, modtable)
    if not len(aux_graph):
        return SolveOutcome(None, "no auxiliary links")

    store = init_pheromones(aux_graph)
    n_ants = ant_count(aux_graph, config.z)
    cum_initial = np.cumsum(store.aux_tau).tolist()
    pool: List[Ant] = []
    best: Fitness = math.inf
    iterations = 0
    for ite in range(1, config.max_iterations + 1):
        iterations = ite
        n_explore, _ = split_ants(n_ants, ite)
        cum_updated = np.cumsum(store.aux_utau).tolist()
        ants = []
        for label in range(1, n_ants + 1):
            explorer = label <= n_explore
            edge_tau, _ = store.view(explorer)
            ant = traverse(Ant(label, explorer), aux_graph, state, edge_tau,
                           cum_initial if explorer else cum_updated,
                           ant_rng(config.seed, request.id, ite, label), modtable)
            ants.append(ant)
            if ant.reached:
                pool.append(ant)
                best = min(best, fitness(ant))
            if trace is not None:
                trace.append(TraceRecord(ite, label, "explore" if explorer else "exploit",
                                         tuple(ant.tour), ant.start_fsu, ant.level, ant.delta_f,
                                         ant.status.value, fitness(ant)))
        update_pheromones(store, ants, config.sigma)
        if ite >= 2 and _converged(ants, best, config.quorum):
            break

    if not pool:
        return SolveOutcome(None, "no ant reached the destination", iterations, math.inf, n_ants)
    winner = min(pool, key=lambda a: selection_key(fitness(a), a.start_fsu, a.dis, a.tour, a.level))
    alloc = Allocation(request.id, tuple(winner.tour), winner.level, winner.start_fsu,
                       winner.slot_count)
    return SolveOutcome(alloc, None, iterations, fitness(winner), n_ants)
