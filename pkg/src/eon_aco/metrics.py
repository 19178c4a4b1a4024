"""Evaluation quantities: fragmentation, blocking, slot savings and extra load."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from typing import Iterable, List, Mapping, Sequence, TextIO

import numpy as np

from .network import NetworkState

CSV_COLUMNS = ("run_id", "solver", "seed", "lambda", "hold_time", "checkpoint_load_gbps", "naf",
               "bbp", "occupied_slot_links", "admitted_gbps", "blocked_gbps")


class MismatchedStreamError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsRecord:
    timestamp: float
    naf: float
    bbp: float
    occupied_slot_links: int
    admitted_load_gbps: float
    blocked_load_gbps: float


def largest_free_runs(grid: np.ndarray) -> np.ndarray:
    """Longest run of free slots on each row of a boolean occupancy grid."""
    free = ~grid
    n_rows, n = free.shape
    padded = np.zeros((n_rows, n + 2), dtype=np.int8)
    padded[:, 1:-1] = free
    edges = np.diff(padded, axis=1)
    out = np.zeros(n_rows, dtype=np.int64)
    rows_s, starts = np.nonzero(edges == 1)
    _, ends = np.nonzero(edges == -1)
    # nonzero walks row-major, so starts and ends pair up in order
    if len(starts):
        np.maximum.at(out, rows_s, ends - starts)
    return out


def network_average_fragmentation(state: NetworkState) -> float:
    """Mean over links of ``1 - largest free run / free slots``; a full link counts 0."""
    grid = state.grid
    vacant = (~grid).sum(axis=1)
    largest = largest_free_runs(grid)
    per_link = np.where(vacant > 0, 1.0 - largest / np.maximum(vacant, 1), 0.0)
    return float(per_link.mean())


def bandwidth_blocking_probability(requested: Sequence[float], blocked: Sequence[bool]) -> float:
    """Blocked data rate over offered data rate for one window of requests."""
    if len(requested) == 0:
        raise ValueError("empty window: no requests to compute blocking over")
    total = float(np.sum(requested))
    lost = float(np.sum(np.asarray(requested, dtype=float)[np.asarray(blocked, dtype=bool)]))
    return lost / total


def savings_percent(slots_a: float, slots_b: float) -> float:
    """Percentage of ``b``'s occupied slot-links that ``a`` avoids."""
    if slots_b == 0:
        return 0.0
    return 100.0 * (slots_b - slots_a) / slots_b


def fsu_savings_percent(report_a, report_b) -> List[float]:
    """Per-checkpoint slot savings of ``report_a`` over ``report_b`` (same traffic stream)."""
    if report_a.stream_id != report_b.stream_id:
        raise MismatchedStreamError("reports were produced from different traffic streams")
    loads_a = [c.checkpoint_load_gbps for c in report_a.checkpoints]
    loads_b = [c.checkpoint_load_gbps for c in report_b.checkpoints]
    common = min(len(loads_a), len(loads_b))
    if loads_a[:common] != loads_b[:common]:
        raise MismatchedStreamError("reports use different checkpoint loads")
    return [savings_percent(a.occupied_slot_links, b.occupied_slot_links)
            for a, b in zip(report_a.checkpoints[:common], report_b.checkpoints[:common])]


def extra_load_handled(mean_loads: Mapping[str, float]) -> dict:
    """Each solver's mean carried load above the smallest mean among all solvers."""
    if not mean_loads:
        return {}
    floor = min(mean_loads.values())
    return {name: load - floor for name, load in mean_loads.items()}


@dataclass(frozen=True)
class CsvRow:
    run_id: str
    solver: str
    seed: int
    lambda_: float
    hold_time: float
    checkpoint_load_gbps: float
    naf: float
    bbp: float
    occupied_slot_links: float
    admitted_gbps: float
    blocked_gbps: float

    def values(self) -> list:
        return list(asdict(self).values())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(round(float(v), 10))
    return str(v)


def write_csv(rows: Iterable[CsvRow], fh: TextIO, columns: Sequence[str] = CSV_COLUMNS) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in (row.values() if isinstance(row, CsvRow) else row)])
