"""Command-line entry point: ``eon-aco solve | explain | sweep``.

Every flag can also be set through an environment variable named
``EON_ACO_<FLAG>`` (upper case, dashes as underscores), e.g.
``EON_ACO_MAX_ITERS=10``. Explicit flags win over the environment.

Exit codes: 0 success, 2 request blocked, 3 configuration or input error,
4 a solver broke a provisioning constraint.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

from .aco import SolverConfig, TraceRecord, solve
from .auxgraph import build_auxiliary_graph, contiguity_reduction_stats, continuity_reduction_stats
from .experiments import ExperimentSpec, run_spec, write_outputs
from .io import ParseError, load_occupancy, load_topology
from .network import NetworkState, Request, TopologyError, check_allocation
from .traffic import SOLVERS, ContractViolation, make_solver

EXIT_OK, EXIT_BLOCKED, EXIT_CONFIG, EXIT_CONTRACT = 0, 2, 3, 4
ENV_PREFIX = "EON_ACO_"

log = logging.getLogger("eon_aco")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _seeds(text: str) -> List[int]:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _hold(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinite", "none") else float(text)


def _node(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", default="nsfnet14", help="topology file or bundled name")
    p.add_argument("--slots", type=int, help="override the number of spectrum slots per link")
    p.add_argument("--z", type=float, default=2.0, help="ants per unit of source degree")
    p.add_argument("--sigma", type=float, default=0.5, help="evaporation rate")
    p.add_argument("--max-iters", type=int, default=5)
    p.add_argument("--quorum", type=float, default=0.40, help="fraction of ants for early stop")
    p.add_argument("--k-paths", type=int, default=3)


def _single(p: argparse.ArgumentParser) -> None:
    p.add_argument("--occupancy", help="occupancy file (lines like '1-2: 3-5, 9')")
    p.add_argument("--source", type=_node, required=True)
    p.add_argument("--destination", type=_node, required=True)
    p.add_argument("--rate", type=float, required=True, help="requested data rate in Gbps")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eon-aco", description="Spectrum allocation in elastic optical networks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="provision one request and print the outcome")
    _common(p)
    _single(p)
    p.add_argument("--solver", choices=SOLVERS, default="a3g")

    p = sub.add_parser("explain", help="dump the auxiliary graph and the per-ant trace")
    _common(p)
    _single(p)

    p = sub.add_parser("sweep", help="run a multi-seed experiment and write CSV files")
    _common(p)
    p.add_argument("--manifest", help="JSON experiment manifest; flags given explicitly override it")
    p.add_argument("--solver", default="a3g,ksp,aco-r", help="comma-separated solver list")
    p.add_argument("--lambda", dest="lambdas", type=_floats, default=[1.0],
                   help="comma-separated arrival rates")
    p.add_argument("--hold", type=_hold, default=math.inf, help="mean holding time or 'inf'")
    p.add_argument("--seeds", type=_seeds, default=list(range(15)), help="e.g. 0-14 or 1,2,3")
    p.add_argument("--per-node", action="store_true", help="arrival rate is per source node")
    p.add_argument("--max-load", type=float, default=20000.0, help="infinite hold: stop at this Gbps")
    p.add_argument("--requests", type=int, help="number of requests per run")
    p.add_argument("--out", default="results")
    return parser


def _env_defaults(parser: argparse.ArgumentParser, environ) -> None:
    """Turn ``EON_ACO_*`` variables into parser defaults so explicit flags still win."""
    subs = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    for p in [parser] + [sp for a in subs for sp in a.choices.values()]:
        for action in p._actions:
            if not action.option_strings or action.dest == "help":
                continue
            flag = max(action.option_strings, key=len).lstrip("-")
            key = ENV_PREFIX + flag.upper().replace("-", "_")
            if key not in environ:
                continue
            raw = environ[key]
            if isinstance(action, argparse._StoreTrueAction):
                value = raw.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    value = action.type(raw) if action.type else raw
                except (TypeError, ValueError):
                    p.error(f"bad value {raw!r} in {key}")
                if action.choices and value not in action.choices:
                    p.error(f"bad value {raw!r} in {key}")
            action.required = False
            action.default = value


def _explicit(argv: Sequence[str]) -> set:
    return {a.split("=", 1)[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}


def _solver_config(args, seed: int = 0) -> SolverConfig:
    return SolverConfig(z=args.z, max_iterations=args.max_iters, sigma=args.sigma, quorum=args.quorum,
                        seed=seed)


def _load_single(args):
    topo, modtable = load_topology(args.topology, slots=args.slots)
    state = NetworkState(topo)
    if args.occupancy:
        load_occupancy(args.occupancy, state)
    request = Request(0, args.source, args.destination, args.rate)
    for node in (request.source, request.destination):
        if node not in topo.adj:
            raise ConfigError(f"node {node!r} is not in the topology")
    return state, request, modtable


def cmd_solve(args) -> int:
    state, request, modtable = _load_single(args)
    solver = make_solver(args.solver, _solver_config(args, args.seed), args.k_paths, modtable)
    outcome = solver(state, request)
    if outcome.allocated:
        try:
            check_allocation(state, outcome.allocation, request, modtable)
        except AssertionError as exc:
            raise ContractViolation(str(exc)) from None
    print(outcome.describe())
    return EXIT_OK if outcome.allocated else EXIT_BLOCKED


def cmd_explain(args) -> int:
    state, request, modtable = _load_single(args)
    topo = state.topology
    aux = build_auxiliary_graph(state, request, modtable)
    fs = aux.slots_per_level
    print(f"request {request.source}->{request.destination} {request.rate_gbps:g} Gbps; "
          f"FS per level: {', '.join(f'm{m}={n}' for m, n in sorted(fs.items()))}")
    print(f"auxiliary links: {len(aux)} (unoccupied network: {aux.unoccupied_count()}, "
          f"reduction {100 * aux.state_reduction():.1f}%)")
    fs_list = [n for n in fs.values() if n <= topo.slots]
    if fs_list:
        without, with_, red = contiguity_reduction_stats(topo.slots, fs_list)
        print(f"contiguity: {without} windows without, {with_} with, reduction {100 * red:.4f}%")
    deg = topo.degree(request.source)
    print(f"continuity: {deg} of {topo.num_links} links carry auxiliary links, "
          f"reduction {100 * continuity_reduction_stats(topo.num_links, deg):.1f}%")
    print(aux.dump(), end="")
    trace: List[TraceRecord] = []
    outcome = solve(state, request, _solver_config(args, args.seed), modtable, trace=trace)
    if not len(aux):
        print("termination 1: no auxiliary links, no ants deployed")
    for rec in trace:
        print(rec.format())
    print(outcome.describe())
    return EXIT_OK if outcome.allocated else EXIT_BLOCKED


def cmd_sweep(args, explicit: set, env_set: set = frozenset()) -> int:
    if args.manifest:
        spec = ExperimentSpec.from_manifest(args.manifest)
    else:
        spec = ExperimentSpec()
    overrides = {
        "topology": ("topology", args.topology),
        "slots": ("slots", args.slots),
        "solver": ("solvers", tuple(s.strip() for s in args.solver.split(",") if s.strip())),
        "lambda": ("lambdas", tuple(args.lambdas)),
        "hold": ("hold_time", args.hold),
        "seeds": ("seeds", tuple(args.seeds)),
        "per_node": ("per_node", args.per_node),
        "max_load": ("max_load_gbps", args.max_load),
        "requests": ("request_count", args.requests),
        "k_paths": ("k_paths", args.k_paths),
        "out": ("out", args.out),
    }
    # without a manifest every flag value applies; with one only explicitly set flags do
    take = lambda dest: not args.manifest or dest in explicit or dest in env_set  # noqa: E731
    spec = replace(spec, **{field: value for dest, (field, value) in overrides.items() if take(dest)})
    solver_fields = {"z": "z", "sigma": "sigma", "max_iters": "max_iterations", "quorum": "quorum"}
    spec = replace(spec, solver=replace(spec.solver, **{f: getattr(args, d) for d, f in solver_fields.items()
                                                        if take(d)}))
    spec.validate()
    failures: list = []
    reports = run_spec(spec, failures=failures)
    paths = write_outputs(spec, reports, failures)
    for path in paths:
        print(f"wrote {path}")
    if any(f[3].startswith("ContractViolation") for f in failures):
        return EXIT_CONTRACT
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, environ=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    environ = os.environ if environ is None else environ
    parser = build_parser()
    try:
        _env_defaults(parser, environ)
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help and on usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "explain":
            return cmd_explain(args)
        env_set = {k[len(ENV_PREFIX):].lower() for k in environ if k.startswith(ENV_PREFIX)}
        return cmd_sweep(args, _explicit(argv), env_set)
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (ParseError, TopologyError, ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
