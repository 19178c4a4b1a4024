import io
import math

import numpy as np
import pytest

from eon_aco.metrics import (CsvRow, MismatchedStreamError, bandwidth_blocking_probability,
                             extra_load_handled, fsu_savings_percent, largest_free_runs,
                             network_average_fragmentation, savings_percent, write_csv)
from eon_aco.network import NetworkState, Topology
from eon_aco.traffic import Checkpoint, RunTotals, SimulationReport, TrafficConfig


def _two_links(n=6):
    return NetworkState(Topology([(1, 2, 1.0), (2, 3, 1.0)], slots=n))


def test_naf_cases():
    st = _two_links()
    assert network_average_fragmentation(st) == 0
    st.link_occupancy(1, 2)[[0, 3]] = True   # free runs {2, 2}
    assert network_average_fragmentation(st) == pytest.approx(0.25)
    st.grid[:] = True
    assert network_average_fragmentation(st) == 0


def test_largest_free_runs_against_scan():
    rng = np.random.default_rng(0)
    grid = rng.random((50, 30)) < 0.5
    for row, got in zip(grid, largest_free_runs(grid)):
        best = run = 0
        for busy in row:
            run = 0 if busy else run + 1
            best = max(best, run)
        assert got == best


def test_bbp():
    assert bandwidth_blocking_probability([100, 200], [False, False]) == 0
    assert bandwidth_blocking_probability([100, 200], [True, True]) == 1
    rates = [100, 300, 600, 1000]
    assert bandwidth_blocking_probability(rates, [True, True, False, False]) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        bandwidth_blocking_probability([], [])


def _report(seed, occ, loads=(1000, 2000)):
    rep = SimulationReport("x", seed, TrafficConfig(request_count=1, seed=seed), RunTotals())
    rep.checkpoints = [Checkpoint(l, 0.0, 0.0, o, l, 0.0, 0) for l, o in zip(loads, occ)]
    return rep


def test_fsu_savings():
    assert savings_percent(189, 200) == pytest.approx(5.5)
    assert fsu_savings_percent(_report(1, [10, 20]), _report(1, [10, 20])) == [0.0, 0.0]
    assert fsu_savings_percent(_report(1, [189, 95]), _report(1, [200, 100])) == pytest.approx([5.5, 5.0])
    with pytest.raises(MismatchedStreamError):
        fsu_savings_percent(_report(1, [1]), _report(2, [1]))
    with pytest.raises(MismatchedStreamError):
        fsu_savings_percent(_report(1, [1], (1000,)), _report(1, [1], (1500,)))


def test_extra_load():
    assert extra_load_handled({"a": 3.0}) == {"a": 0.0}
    got = extra_load_handled({"a3g": 10.0, "ksp": 8.9})
    assert got["a3g"] == pytest.approx(1.1) and got["ksp"] == 0
    assert extra_load_handled({"ksp": 8.9, "a3g": 10.0}) == got
    assert extra_load_handled({}) == {}


def test_write_csv():
    fh = io.StringIO()
    write_csv([CsvRow("r", "ksp", 0, 1.0, math.inf, 1000.0, np.float64(0.1), 0.0, 5, 1000.0, 0.0)], fh)
    head, row = fh.getvalue().splitlines()
    assert head.split(",")[0] == "run_id" and len(head.split(",")) == 11
    assert row == "r,ksp,0,1.0,inf,1000.0,0.1,0.0,5,1000.0,0.0"
