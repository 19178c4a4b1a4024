"""Multi-seed experiment protocols and their CSV summaries.

Two protocols are supported: an infinite-hold ramp that records network
state at fixed admitted-load checkpoints, and a finite-hold sweep over
arrival rates that reports steady-state blocking and carried load.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .aco import SolverConfig
from .io import load_topology
from .metrics import CsvRow, extra_load_handled, savings_percent, write_csv
from .network import ModulationTable, Topology
from .traffic import SOLVERS, SimulationReport, TrafficConfig, make_solver, run_simulation

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("mode", "solver", "x", "runs", "naf", "bbp", "occupied_slot_links", "carried_gbps",
                   "fsu_saved_pct_vs_ksp", "extra_load_tbps", "blocked_requests")


@dataclass
class ExperimentSpec:
    topology: str = "nsfnet14"
    solvers: Tuple[str, ...] = ("a3g", "ksp", "aco-r")
    seeds: Tuple[int, ...] = tuple(range(15))
    lambdas: Tuple[float, ...] = (1.0,)
    hold_time: float = math.inf
    per_node: bool = False
    max_load_gbps: float = 20000.0
    checkpoint_gbps: float = 1000.0
    request_count: Optional[int] = None
    warmup_fraction: float = 0.2
    slots: Optional[int] = None
    k_paths: int = 3
    solver: SolverConfig = field(default_factory=SolverConfig)
    out: Optional[str] = None

    def validate(self) -> None:
        if not self.solvers:
            raise ValueError("at least one solver is required")
        unknown = set(self.solvers) - set(SOLVERS)
        if unknown:
            raise ValueError(f"unknown solvers: {', '.join(sorted(unknown))}")
        if not self.seeds:
            raise ValueError("seed list is empty")
        if not self.lambdas:
            raise ValueError("arrival-rate list is empty")

    @classmethod
    def from_manifest(cls, path) -> "ExperimentSpec":
        data = json.loads(Path(path).read_text())
        solver = SolverConfig(**data.pop("solver_config", {}))
        if "hold_time" in data and data["hold_time"] in (None, "inf", "infinite"):
            data["hold_time"] = math.inf
        for key in ("solvers", "seeds", "lambdas"):
            if key in data:
                data[key] = tuple(data[key])
        spec = cls(solver=solver, **data)
        spec.validate()
        return spec

    def traffic(self, lam: float, seed: int) -> TrafficConfig:
        if math.isinf(self.hold_time):
            return TrafficConfig(arrival_rate=lam, hold_time=math.inf,
                                 max_admitted_gbps=self.max_load_gbps,
                                 request_count=self.request_count or 100_000,
                                 checkpoint_gbps=self.checkpoint_gbps, per_node=self.per_node, seed=seed)
        return TrafficConfig(arrival_rate=lam, hold_time=self.hold_time,
                             request_count=self.request_count or 2000,
                             warmup_fraction=self.warmup_fraction, per_node=self.per_node, seed=seed)


RunKey = Tuple[str, int, float]  # (solver, seed, lambda)


def run_spec(spec: ExperimentSpec, topology: Topology = None, modtable: ModulationTable = None,
             failures: Optional[List[tuple]] = None) -> Dict[RunKey, SimulationReport]:
    """Run every (solver, seed, lambda) combination sequentially in a fixed order."""
    spec.validate()
    if topology is None:
        topology, modtable = load_topology(spec.topology, slots=spec.slots)
    reports: Dict[RunKey, SimulationReport] = {}
    for lam in spec.lambdas:
        for seed in spec.seeds:
            for name in spec.solvers:
                solver = make_solver(name, replace(spec.solver, seed=seed), spec.k_paths, modtable)
                try:
                    reports[(name, seed, lam)] = run_simulation(
                        topology, spec.traffic(lam, seed), solver, name, modtable)
                except Exception as exc:  # recorded, the sweep carries on
                    log.error("run %s seed=%s lambda=%s failed: %s", name, seed, lam, exc)
                    if failures is None:
                        raise
                    failures.append((name, seed, lam, f"{type(exc).__name__}: {exc}"))
    return reports


def run_rows(reports: Dict[RunKey, SimulationReport]) -> List[CsvRow]:
    rows = []
    for (name, seed, lam), rep in reports.items():
        run_id = f"{name}-s{seed}-l{lam:g}"
        hold = rep.traffic.hold_time
        if rep.traffic.infinite_hold:
            for c in rep.checkpoints:
                rows.append(CsvRow(run_id, name, seed, lam, hold, c.checkpoint_load_gbps, c.naf, c.bbp,
                                   c.occupied_slot_links, c.admitted_gbps, c.blocked_gbps))
        else:
            rows.append(CsvRow(run_id, name, seed, lam, hold, rep.mean_carried_gbps, rep.mean_naf, rep.bbp,
                               rep.mean_occupied_slot_links, rep.totals.admitted_gbps,
                               rep.totals.blocked_gbps))
    return rows


def summarize(reports: Dict[RunKey, SimulationReport]) -> List[tuple]:
    """Across-seed means: per checkpoint load (infinite hold) or per arrival rate (finite hold)."""
    solvers = sorted({k[0] for k in reports}, key=SOLVERS.index)
    lambdas = sorted({k[2] for k in reports})
    out = []
    infinite = next(iter(reports.values())).traffic.infinite_hold if reports else True
    if infinite:
        for lam in lambdas:
            loads = sorted({c.checkpoint_load_gbps for (n, s, l), r in reports.items() if l == lam
                            for c in r.checkpoints})
            for load in loads:
                occ_by_solver = {}
                for name in solvers:
                    cps = [c for (n, s, l), r in reports.items() if n == name and l == lam
                           for c in r.checkpoints if c.checkpoint_load_gbps == load]
                    if not cps:
                        continue
                    occ_by_solver[name] = (cps, np.mean([c.occupied_slot_links for c in cps]))
                for name, (cps, occ) in occ_by_solver.items():
                    saved = (savings_percent(occ, occ_by_solver["ksp"][1])
                             if "ksp" in occ_by_solver else float("nan"))
                    out.append(("infinite", name, load, len(cps), float(np.mean([c.naf for c in cps])),
                                float(np.mean([c.bbp for c in cps])), float(occ), float(load), saved,
                                0.0, int(sum(c.blocked_count for c in cps))))
    else:
        for lam in lambdas:
            means = {}
            for name in solvers:
                reps = [r for (n, s, l), r in reports.items() if n == name and l == lam]
                if reps:
                    means[name] = reps
            extra = extra_load_handled({n: np.mean([r.mean_carried_gbps for r in reps]) / 1000.0
                                        for n, reps in means.items()})
            for name, reps in means.items():
                out.append(("finite", name, lam, len(reps), float(np.mean([r.mean_naf for r in reps])),
                            float(np.mean([r.bbp for r in reps])),
                            float(np.mean([r.mean_occupied_slot_links for r in reps])),
                            float(np.mean([r.mean_carried_gbps for r in reps])), float("nan"),
                            float(extra[name]), int(sum(r.totals.blocked for r in reps))))
    return out


def write_outputs(spec: ExperimentSpec, reports: Dict[RunKey, SimulationReport],
                  failures: Sequence[tuple] = ()) -> List[Path]:
    out = Path(spec.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "runs.csv", out / "summary.csv"]
    with open(paths[0], "w", newline="") as fh:
        write_csv(run_rows(reports), fh)
    with open(paths[1], "w", newline="") as fh:
        write_csv(summarize(reports), fh, SUMMARY_COLUMNS)
    if failures:
        paths.append(out / "failures.csv")
        with open(paths[2], "w", newline="") as fh:
            write_csv(failures, fh, ("solver", "seed", "lambda", "error"))
    return paths
