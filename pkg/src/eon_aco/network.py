"""Topology, spectrum grid, modulation table and connection bookkeeping.

Slot indices are 1-based everywhere outside this module's internals; the
occupancy grid itself is a ``(links, slots)`` boolean numpy array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

Node = Hashable
LinkKey = Tuple[Node, Node]

DEFAULT_SLOTS = 320
SLOT_GRANULARITY_GBPS = 10


class TopologyError(ValueError):
    pass


class MissingLinkError(KeyError):
    pass


class OverlapError(RuntimeError):
    """An allocation tried to claim an occupied slot (a solver bug)."""


class UnknownRequestError(KeyError):
    pass


def link_key(a: Node, b: Node) -> LinkKey:
    """Canonical key of the undirected link between ``a`` and ``b``."""
    return (a, b) if _order(a) <= _order(b) else (b, a)


def _order(n):
    # ints sort numerically, anything else by its string form
    return (0, n, "") if isinstance(n, int) else (1, 0, str(n))


@dataclass(frozen=True)
class ModulationLevel:
    index: int
    name: str
    reach_km: float


@dataclass(frozen=True)
class ModulationTable:
    levels: Tuple[ModulationLevel, ...]

    def __post_init__(self):
        if not self.levels:
            raise ValueError("modulation table is empty")
        for pos, lvl in enumerate(self.levels, start=1):
            if lvl.index != pos:
                raise ValueError(f"level indices must run 1..M, got {lvl.index} at position {pos}")
            if lvl.reach_km <= 0:
                raise ValueError(f"reach of {lvl.name} must be positive")
        reaches = [lvl.reach_km for lvl in self.levels]
        if any(a <= b for a, b in zip(reaches, reaches[1:])):
            raise ValueError("reach must strictly decrease with level index")

    @property
    def size(self) -> int:
        return len(self.levels)

    @property
    def indices(self) -> range:
        return range(1, len(self.levels) + 1)

    def level(self, index: int) -> ModulationLevel:
        if not 1 <= index <= len(self.levels):
            raise ValueError(f"invalid modulation level {index}")
        return self.levels[index - 1]

    def reach(self, index: int) -> float:
        return self.level(index).reach_km

    def within_reach(self, length_km: float, index: int) -> bool:
        # strict, as in the ants' "dis < d_m" test; shared by every solver
        return length_km < self.reach(index)

    def slots(self, rate_gbps: float) -> Dict[int, int]:
        return {m: required_slots(rate_gbps, m, self) for m in self.indices}


DEFAULT_MODULATIONS = ModulationTable((
    ModulationLevel(1, "BPSK", 3600.0),
    ModulationLevel(2, "QPSK", 2400.0),
    ModulationLevel(3, "8QAM", 1200.0),
    ModulationLevel(4, "16QAM", 600.0),
))


def required_slots(rate_gbps: float, level: int, modtable: Optional[ModulationTable] = None) -> int:
    """Slots needed to carry ``rate_gbps`` at modulation ``level``: ceil(rate / (10 * level))."""
    max_level = (modtable or DEFAULT_MODULATIONS).size
    if not isinstance(level, (int, np.integer)) or not 1 <= level <= max_level:
        raise ValueError(f"invalid modulation level {level!r}")
    if rate_gbps <= 0:
        raise ValueError("data rate must be positive")
    return math.ceil(rate_gbps / (SLOT_GRANULARITY_GBPS * int(level)))


@dataclass(frozen=True)
class Request:
    id: int
    source: Node
    destination: Node
    rate_gbps: float
    arrival_time: float = 0.0
    hold_time: float = math.inf

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError("request source and destination must differ")
        if self.rate_gbps <= 0:
            raise ValueError("data rate must be positive")
        if not self.hold_time > 0:
            raise ValueError("hold time must be positive")


@dataclass(frozen=True)
class Allocation:
    request_id: int
    path: Tuple[Node, ...]
    level: int
    start_fsu: int
    slot_count: int

    @property
    def hops(self) -> int:
        return len(self.path) - 1

    @property
    def slot_range(self) -> range:
        return range(self.start_fsu, self.start_fsu + self.slot_count)

    def links(self) -> List[LinkKey]:
        return [link_key(a, b) for a, b in zip(self.path, self.path[1:])]


class Topology:
    """Undirected, connected fiber graph with per-link length in km and ``slots`` FSUs per link."""

    def __init__(self, links: Iterable[Tuple[Node, Node, float]], slots: int = DEFAULT_SLOTS,
                 name: str = ""):
        if slots < 1:
            raise TopologyError("slots per link must be positive")
        self.slots = int(slots)
        self.name = name
        self.adj: Dict[Node, Dict[Node, float]] = {}
        self.links: Dict[LinkKey, float] = {}
        for a, b, km in links:
            if a == b:
                raise TopologyError(f"self-loop at node {a}")
            key = link_key(a, b)
            if key in self.links:
                raise TopologyError(f"duplicate link {a}-{b}")
            if not km > 0:
                raise TopologyError(f"link {a}-{b} must have positive length, got {km}")
            self.links[key] = float(km)
            self.adj.setdefault(a, {})[b] = float(km)
            self.adj.setdefault(b, {})[a] = float(km)
        if not self.links:
            raise TopologyError("topology has no links")
        if not nx.is_connected(self.graph):
            raise TopologyError("topology is not connected")
        self.link_index: Dict[LinkKey, int] = {k: i for i, k in enumerate(self.links)}
        self._sorted_adj = {n: tuple(sorted(nbrs, key=_order)) for n, nbrs in self.adj.items()}

    @property
    def nodes(self) -> List[Node]:
        return sorted(self.adj, key=_order)

    @property
    def num_links(self) -> int:
        return len(self.links)

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        for (a, b), km in self.links.items():
            g.add_edge(a, b, weight=km)
        return g

    def neighbors(self, node: Node) -> Tuple[Node, ...]:
        return self._sorted_adj[node]

    def degree(self, node: Node) -> int:
        return len(self.adj[node])

    def distance(self, a: Node, b: Node) -> float:
        try:
            return self.adj[a][b]
        except KeyError:
            raise MissingLinkError(f"no link {a}-{b}") from None

    def index(self, a: Node, b: Node) -> int:
        try:
            return self.link_index[link_key(a, b)]
        except KeyError:
            raise MissingLinkError(f"no link {a}-{b}") from None


def path_length(topology: Topology, path: Sequence[Node]) -> float:
    """Physical length of ``path`` in km."""
    return sum(topology.distance(a, b) for a, b in zip(path, path[1:]))


@dataclass
class NetworkState:
    """Per-link FSU occupancy plus the allocations that own it.

    The event engine is the only writer; solvers work on the state they are
    handed and never mutate it.
    """

    topology: Topology
    grid: np.ndarray = None
    active: Dict[int, Allocation] = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.topology.num_links, self.topology.slots)
        if self.grid is None:
            self.grid = np.zeros(shape, dtype=bool)
        elif self.grid.shape != shape:
            raise ValueError(f"grid shape {self.grid.shape} does not match topology {shape}")

    @property
    def slots(self) -> int:
        return self.topology.slots

    def link_occupancy(self, a: Node, b: Node) -> np.ndarray:
        return self.grid[self.topology.index(a, b)]

    def is_free(self, a: Node, b: Node, start_fsu: int, count: int) -> bool:
        if start_fsu < 1 or start_fsu + count - 1 > self.slots:
            return False
        row = self.grid[self.topology.index(a, b)]
        return not row[start_fsu - 1:start_fsu - 1 + count].any()

    def window_free_on_path(self, path: Sequence[Node], start_fsu: int, count: int) -> bool:
        return all(self.is_free(a, b, start_fsu, count) for a, b in zip(path, path[1:]))

    def occupied_slot_links(self) -> int:
        return int(self.grid.sum())

    def copy(self) -> "NetworkState":
        return NetworkState(self.topology, self.grid.copy(), dict(self.active))

    def allocate(self, alloc: Allocation) -> "NetworkState":
        if alloc.request_id in self.active:
            raise OverlapError(f"request {alloc.request_id} is already allocated")
        if len(set(alloc.path)) != len(alloc.path) or len(alloc.path) < 2:
            raise ValueError(f"allocation path {alloc.path} is not a simple path")
        if alloc.start_fsu < 1 or alloc.start_fsu + alloc.slot_count - 1 > self.slots:
            raise ValueError(f"slot window {alloc.start_fsu}+{alloc.slot_count} falls off the grid")
        lo, hi = alloc.start_fsu - 1, alloc.start_fsu - 1 + alloc.slot_count
        rows = [self.topology.index(a, b) for a, b in zip(alloc.path, alloc.path[1:])]
        for r in rows:
            if self.grid[r, lo:hi].any():
                raise OverlapError(
                    f"request {alloc.request_id}: slots {alloc.start_fsu}..{hi} busy on link {r}")
        for r in rows:
            self.grid[r, lo:hi] = True
        self.active[alloc.request_id] = alloc
        return self

    def release(self, request_id: int) -> "NetworkState":
        try:
            alloc = self.active.pop(request_id)
        except KeyError:
            raise UnknownRequestError(f"request {request_id} has no active allocation") from None
        lo, hi = alloc.start_fsu - 1, alloc.start_fsu - 1 + alloc.slot_count
        for a, b in zip(alloc.path, alloc.path[1:]):
            self.grid[self.topology.index(a, b), lo:hi] = False
        return self


def allocate(state: NetworkState, alloc: Allocation) -> NetworkState:
    return state.allocate(alloc)


def release(state: NetworkState, request_id: int) -> NetworkState:
    return state.release(request_id)


def check_allocation(state: NetworkState, alloc: Allocation, request: Request,
                     modtable: ModulationTable = DEFAULT_MODULATIONS) -> None:
    """Raise ``AssertionError`` if ``alloc`` would break any provisioning constraint on ``state``.

    Shared by every solver's tests and by the engine before it commits a result.
    """
    path = alloc.path
    assert len(path) >= 2 and path[0] == request.source and path[-1] == request.destination, \
        f"path {path} does not join {request.source}->{request.destination}"
    assert len(set(path)) == len(path), f"path {path} revisits a node"
    assert alloc.slot_count == required_slots(request.rate_gbps, alloc.level, modtable), \
        f"slot count {alloc.slot_count} wrong for level {alloc.level}"
    assert modtable.within_reach(path_length(state.topology, path), alloc.level), \
        f"path {path} exceeds reach of level {alloc.level}"
    assert state.window_free_on_path(path, alloc.start_fsu, alloc.slot_count), \
        f"window {alloc.start_fsu}+{alloc.slot_count} not free on {path}"


def check_grid(state: NetworkState) -> None:
    """Rebuild occupancy from the active allocations and compare with the grid."""
    claims = np.zeros(state.grid.shape, dtype=np.int32)
    for alloc in state.active.values():
        lo, hi = alloc.start_fsu - 1, alloc.start_fsu - 1 + alloc.slot_count
        for a, b in zip(alloc.path, alloc.path[1:]):
            claims[state.topology.index(a, b), lo:hi] += 1
    assert claims.max(initial=0) <= 1, "two connections claim the same slot"
    assert np.array_equal(claims.astype(bool), state.grid), "grid disagrees with active allocations"
    expected = sum(a.hops * a.slot_count for a in state.active.values())
    assert int(state.grid.sum()) == expected, "occupied slot count is not conserved"
