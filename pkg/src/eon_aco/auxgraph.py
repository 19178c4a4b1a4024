"""Per-request auxiliary graph: every feasible first hop out of the source.

An auxiliary link is a ``(neighbor, level, start_fsu)`` triple whose slot
window is free on the source's link to ``neighbor``. Links elsewhere in the
network carry no auxiliary links, because spectrum continuity pins the
window chosen at the source for the whole path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, NamedTuple, Sequence, Tuple

import numpy as np

from .network import DEFAULT_MODULATIONS, ModulationTable, NetworkState, Node, Request, Topology


class AuxLink(NamedTuple):
    neighbor: Node
    level: int
    start_fsu: int
    slot_count: int


@dataclass(frozen=True)
class AuxiliaryGraph:
    """Auxiliary links as parallel arrays; ``links`` gives the same data as tuples."""

    topology: Topology
    request: Request
    slots_per_level: Dict[int, int]
    neighbor_ids: Tuple[Node, ...]
    neighbor_pos: np.ndarray
    level: np.ndarray
    start_fsu: np.ndarray
    slot_count: np.ndarray

    @property
    def source(self) -> Node:
        return self.request.source

    @property
    def destination(self) -> Node:
        return self.request.destination

    def __len__(self) -> int:
        return len(self.level)

    def link(self, i: int) -> AuxLink:
        return AuxLink(self.neighbor_ids[self.neighbor_pos[i]], int(self.level[i]),
                       int(self.start_fsu[i]), int(self.slot_count[i]))

    @cached_property
    def links(self) -> Tuple[AuxLink, ...]:
        return tuple(self.link(i) for i in range(len(self)))

    @property
    def effective_degree(self) -> int:
        """Number of source neighbors reachable over at least one auxiliary link."""
        return len(np.unique(self.neighbor_pos))

    def unoccupied_count(self) -> int:
        """Auxiliary-link count the same request would get on an empty network."""
        n = self.topology.slots
        per_link = sum(max(0, n - fs + 1) for fs in self.slots_per_level.values())
        return self.topology.degree(self.source) * per_link

    def state_reduction(self) -> float:
        full = self.unoccupied_count()
        return 1.0 - len(self) / full if full else 0.0

    def dump(self) -> str:
        lines = ["neighbor\tlevel\tk\tFS"]
        lines += [f"{al.neighbor}\t{al.level}\t{al.start_fsu}\t{al.slot_count}" for al in self.links]
        return "\n".join(lines) + "\n"


def free_windows(row: np.ndarray, count: int) -> np.ndarray:
    """1-based start indices of every all-free window of ``count`` slots in ``row``."""
    n = row.shape[0]
    if count > n:
        return np.empty(0, dtype=np.int64)
    csum = np.concatenate(([0], np.cumsum(row, dtype=np.int64)))
    busy = csum[count:] - csum[:n - count + 1]
    return np.flatnonzero(busy == 0) + 1


def build_auxiliary_graph(state: NetworkState, request: Request,
                          modtable: ModulationTable = DEFAULT_MODULATIONS) -> AuxiliaryGraph:
    topo = state.topology
    fs = modtable.slots(request.rate_gbps)
    nbrs = topo.neighbors(request.source)
    pos, lvl, start, count = [], [], [], []
    for p, nb in enumerate(nbrs):
        row = state.grid[topo.index(request.source, nb)]
        for level in modtable.indices:
            ks = free_windows(row, fs[level])
            pos.append(np.full(len(ks), p))
            lvl.append(np.full(len(ks), level))
            start.append(ks)
            count.append(np.full(len(ks), fs[level]))
    def cat(parts):
        return np.concatenate(parts).astype(np.int64) if parts else np.empty(0, np.int64)

    return AuxiliaryGraph(topo, request, fs, tuple(nbrs), cat(pos), cat(lvl), cat(start), cat(count))


def contiguity_reduction_stats(slots: int, fs_per_level: Sequence[int]) -> Tuple[int, int, float]:
    """Auxiliary links per fiber link without and with the contiguity constraint.

    Without it any ``FS`` of the ``N`` slots may be chosen (a binomial count);
    with it only the ``N - FS + 1`` contiguous windows remain.
    """
    if slots < max(fs_per_level):
        raise ValueError("slots must be at least the largest slot count")
    without = sum(math.comb(slots, fs) for fs in fs_per_level)
    with_ = sum(slots - fs + 1 for fs in fs_per_level)
    return without, with_, 1.0 - with_ / without


def continuity_reduction_stats(num_links: int, source_degree: int) -> float:
    """Fraction of fiber links left without auxiliary links: only the source's links keep them."""
    if not 1 <= source_degree <= num_links:
        raise ValueError("source degree must lie in 1..num_links")
    return (num_links - source_degree) / num_links

