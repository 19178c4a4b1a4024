import random

import pytest

from eon_aco.network import ModulationLevel, ModulationTable, NetworkState, Request, Topology
from eon_aco.oracle import InstanceTooLarge, count_fragments, fragment_delta, oracle_solve
from oracles import SMALL_MODULATIONS, brute_force_best, naive_fragment_change, naive_fragments, \
    random_request, random_state, random_topology


def test_adjacent_pair_prefers_highest_level():
    topo = Topology([(1, 2, 100.0), (2, 3, 100.0)], slots=16)
    sol = oracle_solve(NetworkState(topo), Request(0, 1, 2, 40.0), SMALL_MODULATIONS)
    assert sol.path == (1, 2) and sol.level == 4 and sol.start_fsu == 1 and sol.slot_count == 1


def test_no_window_anywhere():
    topo = Topology([(1, 2, 100.0)], slots=4)
    st = NetworkState(topo)
    st.grid[:] = True
    assert oracle_solve(st, Request(0, 1, 2, 40.0), SMALL_MODULATIONS) is None


def test_size_guard():
    topo = Topology([(i, i + 1, 1.0) for i in range(12)], slots=2)
    with pytest.raises(InstanceTooLarge):
        oracle_solve(NetworkState(topo), Request(0, 0, 5, 10.0))


def test_fragment_helpers_against_naive():
    rng = random.Random(2)
    for _ in range(500):
        row = [rng.random() < 0.4 for _ in range(rng.randint(1, 20))]
        assert count_fragments(row) == naive_fragments(row)
        free = [k for k in range(1, len(row) + 1) if not row[k - 1]]
        if free:
            k = rng.choice(free)
            assert fragment_delta(row, k, 1) == naive_fragment_change(row, k, 1)


def test_oracle_fitness_matches_brute_force():
    rng = random.Random(9)
    for _ in range(150):
        topo = random_topology(rng, max_nodes=6, slots=10)
        st = random_state(rng, topo)
        req = random_request(rng, topo)
        sol = oracle_solve(st, req, SMALL_MODULATIONS)
        ref = brute_force_best(st, req, SMALL_MODULATIONS)
        assert (sol is None) == (ref is None)
        if sol is not None:
            assert sol.fitness == ref[0]
            assert st.window_free_on_path(sol.path, sol.start_fsu, sol.slot_count)


def test_oracle_respects_strict_reach():
    mods = ModulationTable((ModulationLevel(1, "BPSK", 200.0),))
    topo = Topology([(1, 2, 200.0)], slots=2)
    assert oracle_solve(NetworkState(topo), Request(0, 1, 2, 10.0), mods) is None
