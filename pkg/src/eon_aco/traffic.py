"""Poisson request streams and the discrete-event provisioning loop."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .aco import SolveOutcome, SolverConfig, solve
from .baselines import aco_routing_only, ksp_first_fit
from .metrics import MetricsRecord, network_average_fragmentation
from .network import (DEFAULT_MODULATIONS, Allocation, ModulationTable, NetworkState, Request, Topology,
                      check_allocation)
from .oracle import oracle_solve

Solver = Callable[[NetworkState, Request], SolveOutcome]
Sink = Callable[["Event", NetworkState, "RunTotals"], None]

SOLVERS = ("a3g", "ksp", "aco-r", "oracle")
ARRIVAL, DEPARTURE = "arrival", "departure"


class ContractViolation(RuntimeError):
    """A solver returned an allocation that breaks a provisioning constraint."""


@dataclass(frozen=True)
class TrafficConfig:
    arrival_rate: float = 1.0
    hold_time: float = math.inf
    rate_range: Tuple[float, float] = (50.0, 500.0)
    request_count: Optional[int] = None
    time_horizon: Optional[float] = None
    max_admitted_gbps: Optional[float] = None
    checkpoint_gbps: float = 1000.0
    warmup_fraction: float = 0.2
    per_node: bool = False  # arrival_rate is per source node; network rate scales with |V|
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.rate_range
        if not self.arrival_rate > 0:
            raise ValueError("arrival rate must be positive")
        if not 0 < lo <= hi:
            raise ValueError("data rate range must satisfy 0 < lo <= hi")
        if not self.hold_time > 0:
            raise ValueError("hold time must be positive")
        if self.request_count is None and self.time_horizon is None and self.max_admitted_gbps is None:
            raise ValueError("set request_count, time_horizon or max_admitted_gbps")
        if not 0 <= self.warmup_fraction < 1:
            raise ValueError("warmup_fraction must lie in [0, 1)")

    @property
    def infinite_hold(self) -> bool:
        return math.isinf(self.hold_time)


def iter_requests(config: TrafficConfig, nodes: Sequence) -> Iterator[Request]:
    """Endless request stream; draws happen in a fixed order so a seed pins every field."""
    rng = np.random.default_rng(config.seed)
    nodes = list(nodes)
    lo, hi = config.rate_range
    rate = config.arrival_rate * (len(nodes) if config.per_node else 1)
    t = 0.0
    for rid in itertools.count():
        t += rng.exponential(1.0 / rate)
        hold = math.inf if config.infinite_hold else float(rng.exponential(config.hold_time))
        s = int(rng.integers(len(nodes)))
        d = int(rng.integers(len(nodes) - 1))
        d += d >= s
        gbps = float(rng.uniform(lo, hi))
        yield Request(rid, nodes[s], nodes[d], gbps, float(t), hold)


def generate_stream(config: TrafficConfig, nodes: Sequence) -> List[Request]:
    """Materialise the stream up to ``request_count`` or ``time_horizon``."""
    if config.request_count is None and config.time_horizon is None:
        raise ValueError("generate_stream needs request_count or time_horizon")
    out = []
    for req in iter_requests(config, nodes):
        if config.request_count is not None and len(out) >= config.request_count:
            break
        if config.time_horizon is not None and req.arrival_time > config.time_horizon:
            break
        out.append(req)
    return out


@dataclass(order=True)
class Event:
    time: float
    order: int  # departures (0) before arrivals (1) at equal times
    seq: int
    kind: str = field(compare=False)
    request: Request = field(compare=False)


class EventQueue:
    def __init__(self):
        self._heap: List[Event] = []
        self._seq = itertools.count()

    def push(self, time: float, kind: str, request: Request) -> None:
        heapq.heappush(self._heap, Event(time, 0 if kind == DEPARTURE else 1, next(self._seq),
                                         kind, request))

    def pop(self) -> Event:
        return heapq.heappop(self._heap)

    def peek_time(self) -> float:
        return self._heap[0].time if self._heap else math.inf

    def __len__(self):
        return len(self._heap)


@dataclass
class RunTotals:
    requests: int = 0
    blocked: int = 0
    offered_gbps: float = 0.0
    admitted_gbps: float = 0.0
    blocked_gbps: float = 0.0
    active_gbps: float = 0.0


@dataclass(frozen=True)
class Checkpoint:
    checkpoint_load_gbps: float
    naf: float
    bbp: float
    occupied_slot_links: int
    admitted_gbps: float
    blocked_gbps: float
    blocked_count: int


@dataclass
class SimulationReport:
    solver: str
    seed: int
    traffic: TrafficConfig
    totals: RunTotals
    checkpoints: List[Checkpoint] = field(default_factory=list)
    # steady-state window (finite hold)
    bbp: float = 0.0
    mean_naf: float = 0.0
    mean_carried_gbps: float = 0.0
    mean_occupied_slot_links: float = 0.0
    events: int = 0

    @property
    def stream_id(self) -> tuple:
        return (self.seed, self.traffic)


def make_solver(name: str, config: SolverConfig = SolverConfig(), k_paths: int = 3,
                modtable: ModulationTable = DEFAULT_MODULATIONS) -> Solver:
    if name == "a3g":
        return lambda st, req: solve(st, req, config, modtable)
    if name == "ksp":
        return lambda st, req: ksp_first_fit(st, req, k_paths, modtable)
    if name == "aco-r":
        return lambda st, req: aco_routing_only(st, req, config, modtable)
    if name == "oracle":
        def _oracle(st, req):
            sol = oracle_solve(st, req, modtable)
            if sol is None:
                return SolveOutcome(None, "no feasible solution")
            return SolveOutcome(Allocation(req.id, sol.path, sol.level, sol.start_fsu, sol.slot_count),
                                None, 0, sol.fitness, 0)
        return _oracle
    raise ValueError(f"unknown solver {name!r}; choose from {', '.join(SOLVERS)}")


def run_simulation(topology: Topology, traffic: TrafficConfig, solver: Solver, solver_name: str = "",
                   modtable: ModulationTable = DEFAULT_MODULATIONS,
                   sinks: Sequence[Sink] = (), state: Optional[NetworkState] = None) -> SimulationReport:
    """Process arrivals and departures in time order until the stream's stop condition.

    Infinite-hold runs stop once admitted load reaches ``max_admitted_gbps``
    and record a checkpoint each time admitted load crosses a multiple of
    ``checkpoint_gbps``. Finite-hold runs time-average NAF, carried load and
    occupancy, and compute BBP, over the events after the warm-up prefix.
    """
    state = state or NetworkState(topology)
    totals = RunTotals()
    report = SimulationReport(solver_name, traffic.seed, traffic, totals)
    queue = EventQueue()
    stream = iter_requests(traffic, topology.nodes)
    next_req = next(stream)
    next_checkpoint = traffic.checkpoint_gbps
    # per-event samples for the steady-state window: (time, naf, carried, occupied, rate, blocked)
    samples: List[tuple] = []
    finite = not traffic.infinite_hold
    n_events = 0

    def done(req: Request) -> bool:
        if traffic.request_count is not None and req.id >= traffic.request_count:
            return True
        if traffic.time_horizon is not None and req.arrival_time > traffic.time_horizon:
            return True
        return traffic.max_admitted_gbps is not None and totals.admitted_gbps >= traffic.max_admitted_gbps

    while True:
        arrivals_left = next_req is not None and not done(next_req)
        if not arrivals_left:
            break
        if queue.peek_time() <= next_req.arrival_time:
            ev = queue.pop()
        else:
            ev = Event(next_req.arrival_time, 1, -1, ARRIVAL, next_req)
            next_req = next(stream)
        n_events += 1
        req = ev.request
        blocked = None
        if ev.kind == DEPARTURE:
            state.release(req.id)
            totals.active_gbps -= req.rate_gbps
        else:
            totals.requests += 1
            totals.offered_gbps += req.rate_gbps
            outcome = solver(state, req)
            if outcome.allocated:
                try:
                    check_allocation(state, outcome.allocation, req, modtable)
                except AssertionError as exc:
                    raise ContractViolation(f"{solver_name} on request {req.id}: {exc}") from None
                state.allocate(outcome.allocation)
                totals.admitted_gbps += req.rate_gbps
                totals.active_gbps += req.rate_gbps
                if finite:
                    queue.push(req.arrival_time + req.hold_time, DEPARTURE, req)
                blocked = False
            else:
                totals.blocked += 1
                totals.blocked_gbps += req.rate_gbps
                blocked = True
        for sink in sinks:
            sink(ev, state, totals)
        if finite:
            samples.append((ev.time, network_average_fragmentation(state), totals.active_gbps,
                            int(state.grid.sum()),
                            req.rate_gbps if blocked is not None else 0.0, bool(blocked)))
        else:
            while totals.admitted_gbps >= next_checkpoint:
                report.checkpoints.append(_checkpoint(next_checkpoint, state, totals))
                next_checkpoint += traffic.checkpoint_gbps
    report.events = n_events
    if finite and samples:
        _steady_state(report, samples, traffic.warmup_fraction)
    elif not finite:
        report.bbp = totals.blocked_gbps / totals.offered_gbps if totals.offered_gbps else 0.0
        report.mean_naf = network_average_fragmentation(state)
        report.mean_occupied_slot_links = float(state.grid.sum())
        report.mean_carried_gbps = totals.active_gbps
    return report


def _checkpoint(load: float, state: NetworkState, totals: RunTotals) -> Checkpoint:
    return Checkpoint(load, network_average_fragmentation(state),
                      totals.blocked_gbps / totals.offered_gbps if totals.offered_gbps else 0.0,
                      int(state.grid.sum()), totals.admitted_gbps, totals.blocked_gbps, totals.blocked)


def _steady_state(report: SimulationReport, samples: List[tuple], warmup: float) -> None:
    arr = np.array(samples, dtype=float)
    start = min(int(len(arr) * warmup), len(arr) - 1)
    win = arr[start:]
    times = win[:, 0]
    # each sample holds from its event until the next event
    dt = np.diff(times, append=times[-1])
    span = dt.sum()
    weights = dt / span if span > 0 else np.full(len(dt), 1.0 / len(dt))
    report.mean_naf = float(weights @ win[:, 1])
    report.mean_carried_gbps = float(weights @ win[:, 2])
    report.mean_occupied_slot_links = float(weights @ win[:, 3])
    rates = win[:, 4]
    is_arrival = rates > 0
    offered = rates[is_arrival].sum()
    report.bbp = float(rates[win[:, 5] > 0].sum() / offered) if offered > 0 else 0.0


def build_records(report: SimulationReport) -> List[MetricsRecord]:
    return [MetricsRecord(c.checkpoint_load_gbps, c.naf, c.bbp, c.occupied_slot_links, c.admitted_gbps,
                          c.blocked_gbps) for c in report.checkpoints]
