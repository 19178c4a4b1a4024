"""Readers and writers for topology and occupancy files.

Topology file, one record per line (``#`` starts a comment)::

    slots 320
    modulation 1 BPSK 3600
    link 1 2 1100

Occupancy file, one link per line, 1-based inclusive slot ranges::

    1-2: 1-3, 7, 9-10
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import List, Tuple, Union

from .network import (DEFAULT_MODULATIONS, DEFAULT_SLOTS, ModulationLevel, ModulationTable,
                      NetworkState, Topology, TopologyError)

PathLike = Union[str, Path]

BUNDLED = {
    "nsfnet14": "nsfnet14.txt",
    "six_node": "six_node.txt",
}


class ParseError(ValueError):
    def __init__(self, source: str, lineno: int, message: str):
        super().__init__(f"{source}:{lineno}: {message}")
        self.source = source
        self.lineno = lineno


def _records(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _node(tok: str):
    return int(tok) if re.fullmatch(r"-?\d+", tok) else tok


def parse_topology(text: str, source: str = "<string>",
                   slots: int = None) -> Tuple[Topology, ModulationTable]:
    """Parse topology text. ``slots`` overrides the file's ``slots`` header."""
    links: List[tuple] = []
    levels: List[ModulationLevel] = []
    file_slots = None
    for lineno, line in _records(text):
        tok = line.split()
        kind = tok[0].lower()
        try:
            if kind == "slots" and len(tok) == 2:
                file_slots = int(tok[1])
            elif kind == "modulation" and len(tok) == 4:
                levels.append(ModulationLevel(int(tok[1]), tok[2], float(tok[3])))
            elif kind == "link" and len(tok) == 4:
                links.append((_node(tok[1]), _node(tok[2]), float(tok[3])))
            else:
                raise ParseError(source, lineno, f"unrecognised record {line!r}")
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(source, lineno, str(exc)) from None
    try:
        modtable = ModulationTable(tuple(levels)) if levels else DEFAULT_MODULATIONS
        topo = Topology(links, slots=slots or file_slots or DEFAULT_SLOTS, name=Path(source).stem)
    except (TopologyError, ValueError) as exc:
        raise ParseError(source, 0, str(exc)) from None
    return topo, modtable


def load_topology(path: PathLike, slots: int = None) -> Tuple[Topology, ModulationTable]:
    """Load a topology file, or a bundled one by name (``nsfnet14``, ``six_node``)."""
    key = str(path)
    if key in BUNDLED:
        text = resources.files("eon_aco.data").joinpath(BUNDLED[key]).read_text()
        return parse_topology(text, source=BUNDLED[key], slots=slots)
    return parse_topology(Path(path).read_text(), source=str(path), slots=slots)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("eon_aco.data").joinpath(name)))


def parse_occupancy(text: str, state: NetworkState, source: str = "<string>") -> NetworkState:
    """Mark the listed slot ranges occupied on ``state``'s grid.

    Injected occupancy has no owning connection, so it is never released.
    """
    for lineno, line in _records(text):
        m = re.fullmatch(r"\s*(\S+?)\s*-\s*(\S+?)\s*:\s*(.*)", line)
        if not m:
            raise ParseError(source, lineno, f"expected 'a-b: ranges', got {line!r}")
        a, b = _node(m.group(1)), _node(m.group(2))
        try:
            row = state.link_occupancy(a, b)
        except KeyError:
            raise ParseError(source, lineno, f"no link {a}-{b} in topology") from None
        for part in filter(None, (p.strip() for p in m.group(3).split(","))):
            rm = re.fullmatch(r"(\d+)(?:\s*-\s*(\d+))?", part)
            if not rm:
                raise ParseError(source, lineno, f"bad slot range {part!r}")
            lo = int(rm.group(1))
            hi = int(rm.group(2) or lo)
            if not 1 <= lo <= hi <= state.slots:
                raise ParseError(source, lineno, f"slot range {part!r} outside 1..{state.slots}")
            row[lo - 1:hi] = True
    return state


def load_occupancy(path: PathLike, state: NetworkState) -> NetworkState:
    key = str(path)
    if key == "six_node_occupancy":
        text = resources.files("eon_aco.data").joinpath("six_node_occupancy.txt").read_text()
        return parse_occupancy(text, state, source="six_node_occupancy.txt")
    return parse_occupancy(Path(path).read_text(), state, source=str(path))


def format_occupancy(state: NetworkState) -> str:
    lines = []
    for (a, b), idx in state.topology.link_index.items():
        row = state.grid[idx]
        ranges, k = [], 0
        while k < len(row):
            if row[k]:
                j = k
                while j + 1 < len(row) and row[j + 1]:
                    j += 1
                ranges.append(f"{k + 1}" if j == k else f"{k + 1}-{j + 1}")
                k = j + 1
            else:
                k += 1
        if ranges:
            lines.append(f"{a}-{b}: {', '.join(ranges)}")
    return "\n".join(lines) + ("\n" if lines else "")
