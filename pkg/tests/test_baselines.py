import collections

import networkx as nx
import pytest

from eon_aco.aco import SolverConfig
from eon_aco.baselines import KspConfig, aco_routing_only, first_fit, k_shortest_paths, ksp_first_fit
from eon_aco.network import (DEFAULT_MODULATIONS, ModulationLevel, ModulationTable, NetworkState, Request,
                             Topology, check_allocation)
from oracles import naive_windows

ONE = ModulationTable((ModulationLevel(1, "BPSK", 5000.0),))


def test_ksp_adjacent_empty(nsfnet):
    topo, mods = nsfnet
    out = ksp_first_fit(NetworkState(topo), Request(0, 12, 13, 100.0), 3, mods)
    a = out.allocation
    assert a.path == (12, 13) and a.level == 4 and a.start_fsu == 1 and a.slot_count == 3


def test_ksp_paths_in_length_order(nsfnet):
    topo, _ = nsfnet
    paths = k_shortest_paths(NetworkState(topo), 1, 14, 3)
    lengths = [nx.path_weight(topo.graph, list(p), "weight") for p in paths]
    assert len(paths) == 3 and lengths == sorted(lengths)
    assert lengths[0] == nx.shortest_path_length(topo.graph, 1, 14, weight="weight")


def test_first_fit_matches_naive_scan():
    topo = Topology([(1, 2, 1.0), (2, 3, 1.0)], slots=12)
    st = NetworkState(topo)
    st.link_occupancy(1, 2)[[0, 4, 5]] = True
    st.link_occupancy(2, 3)[[1, 9]] = True
    union = (st.link_occupancy(1, 2) | st.link_occupancy(2, 3)).tolist()
    for fs in range(1, 6):
        expect = naive_windows(union, fs)
        assert first_fit(st, (1, 2, 3), fs) == (expect[0] if expect else None)


def test_ksp_falls_back_to_second_path():
    # ring 1-2-3-4-1; the short path 1-2 is full, 1-4-3-2 has a window at k=4
    topo = Topology([(1, 2, 100.0), (2, 3, 100.0), (3, 4, 100.0), (1, 4, 100.0)], slots=6)
    st = NetworkState(topo)
    st.link_occupancy(1, 2)[:] = True
    for a, b in ((1, 4), (3, 4), (2, 3)):
        st.link_occupancy(a, b)[:3] = True
    req = Request(0, 1, 2, 20.0)
    out = ksp_first_fit(st, req, 3, ONE)
    assert out.allocation.path == (1, 4, 3, 2) and out.allocation.start_fsu == 4
    check_allocation(st, out.allocation, req, ONE)


def test_ksp_blocks_without_common_window():
    topo = Topology([(1, 2, 100.0), (2, 3, 100.0), (1, 3, 100.0)], slots=2)
    st = NetworkState(topo)
    st.link_occupancy(1, 3)[:] = True
    st.link_occupancy(1, 2)[0] = True
    st.link_occupancy(2, 3)[1] = True
    out = ksp_first_fit(st, Request(0, 1, 3, 10.0), 3, ONE)
    assert not out.allocated and "no common free window" in out.blocked_reason


def test_ksp_reach_is_strict():
    mods = ModulationTable((ModulationLevel(1, "BPSK", 100.0),))
    out = ksp_first_fit(NetworkState(Topology([(1, 2, 100.0)], slots=4)), Request(0, 1, 2, 10.0), 1, mods)
    assert not out.allocated


def test_ksp_config():
    with pytest.raises(ValueError):
        KspConfig(0)


def test_aco_r_single_route_is_first_fit():
    topo = Topology([(1, 2, 100.0), (2, 3, 100.0)], slots=8)
    st = NetworkState(topo)
    st.link_occupancy(2, 3)[:2] = True
    out = aco_routing_only(st, Request(0, 1, 3, 20.0), SolverConfig(), ONE)
    assert out.allocation.path == (1, 2, 3) and out.allocation.start_fsu == 3


def test_aco_r_no_crankback():
    topo = Topology([(1, 2, 100.0), (2, 3, 100.0)], slots=2)
    st = NetworkState(topo)
    st.link_occupancy(1, 2)[0] = True
    st.link_occupancy(2, 3)[1] = True
    assert not aco_routing_only(st, Request(0, 1, 3, 10.0), SolverConfig(), ONE).allocated


def test_aco_r_prefers_shortest_route(nsfnet):
    topo, mods = nsfnet
    st = NetworkState(topo)
    shortest = tuple(nx.shortest_path(topo.graph, 1, 3, weight="weight"))
    paths = collections.Counter(
        aco_routing_only(st, Request(0, 1, 3, 100.0), SolverConfig(seed=s), mods).allocation.path
        for s in range(100))
    assert paths.most_common(1)[0][0] == shortest
    assert paths[shortest] >= 80


def test_baselines_never_violate_constraints(nsfnet):
    import random
    topo, mods = nsfnet
    rng = random.Random(0)
    st = NetworkState(topo)
    for i in range(150):
        s, d = rng.sample(topo.nodes, 2)
        req = Request(i, s, d, rng.uniform(50, 500))
        for out in (ksp_first_fit(st, req, 3, mods), aco_routing_only(st, req, SolverConfig(seed=i), mods)):
            if out.allocated:
                check_allocation(st, out.allocation, req, mods)
        out = ksp_first_fit(st, req, 3, mods)
        if out.allocated:
            st.allocate(out.allocation)
    assert st.active and DEFAULT_MODULATIONS.size == 4
