import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eon_aco.auxgraph import (build_auxiliary_graph, contiguity_reduction_stats, continuity_reduction_stats,
                              free_windows)
from eon_aco.io import load_occupancy, load_topology
from eon_aco.network import NetworkState, Request
from oracles import SMALL_MODULATIONS, naive_aux_links, naive_windows, random_request, random_state, \
    random_topology


@given(st.lists(st.booleans(), min_size=1, max_size=40), st.integers(1, 12))
def test_free_windows_matches_naive(row, count):
    assert free_windows(np.array(row, dtype=bool), count).tolist() == naive_windows(row, count)


def test_fully_free_link_window_count():
    assert len(free_windows(np.zeros(6, dtype=bool), 2)) == 5


def test_empty_six_node_closed_form():
    topo, mods = load_topology("six_node")
    req = Request(0, 1, 6, 20.0)
    aux = build_auxiliary_graph(NetworkState(topo), req, mods)
    assert aux.slots_per_level == {1: 2, 2: 1}
    n = topo.slots
    assert len(aux) == topo.degree(1) * ((n - 1 + 1) + (n - 2 + 1))
    assert aux.state_reduction() == 0.0


def test_six_node_occupancy_reduction():
    topo, mods = load_topology("six_node")
    st_ = load_occupancy("six_node_occupancy", NetworkState(topo))
    aux = build_auxiliary_graph(st_, Request(0, 1, 6, 20.0), mods)
    assert len(aux) == 10 and aux.unoccupied_count() == 22
    assert round(100 * aux.state_reduction()) == 55
    assert 0.54 <= aux.state_reduction() < 0.55


def test_fully_occupied_source_has_no_aux_links():
    topo, mods = load_topology("six_node")
    st_ = NetworkState(topo)
    for nb in topo.neighbors(1):
        st_.link_occupancy(1, nb)[:] = True
    aux = build_auxiliary_graph(st_, Request(0, 1, 6, 20.0), mods)
    assert len(aux) == 0 and aux.effective_degree == 0


def test_aux_links_only_at_source_and_sound():
    rng = random.Random(3)
    for _ in range(50):
        topo = random_topology(rng)
        st_ = random_state(rng, topo)
        req = random_request(rng, topo)
        aux = build_auxiliary_graph(st_, req, SMALL_MODULATIONS)
        for link in aux.links:
            assert link.neighbor in topo.adj[req.source]
            assert st_.is_free(req.source, link.neighbor, link.start_fsu, link.slot_count)
            assert link.start_fsu + link.slot_count - 1 <= topo.slots
        bound = topo.degree(req.source) * sum(topo.slots - fs + 1 for fs in aux.slots_per_level.values()
                                              if fs <= topo.slots)
        assert len(aux) <= bound


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_occupying_more_never_adds_links(seed):
    rng = random.Random(seed)
    topo = random_topology(rng)
    st_ = random_state(rng, topo)
    req = random_request(rng, topo)
    before = set(build_auxiliary_graph(st_, req, SMALL_MODULATIONS).links)
    nb = rng.choice(topo.neighbors(req.source))
    st_.link_occupancy(req.source, nb)[rng.randrange(topo.slots)] = True
    after = set(build_auxiliary_graph(st_, req, SMALL_MODULATIONS).links)
    assert after <= before


def test_completeness_against_naive_enumeration():
    rng = random.Random(11)
    for _ in range(100):
        topo = random_topology(rng)
        st_ = random_state(rng, topo)
        req = random_request(rng, topo)
        aux = build_auxiliary_graph(st_, req, SMALL_MODULATIONS)
        assert set(aux.links) == naive_aux_links(st_, req, SMALL_MODULATIONS)


def test_dump_format():
    topo, mods = load_topology("six_node")
    st_ = load_occupancy("six_node_occupancy", NetworkState(topo))
    dump = build_auxiliary_graph(st_, Request(0, 1, 6, 20.0), mods).dump().splitlines()
    assert dump[0] == "neighbor\tlevel\tk\tFS"
    assert dump[1:3] == ["2\t1\t3\t2", "2\t2\t1\t1"]
    assert len(dump) == 11


@pytest.mark.parametrize("n,expected", [(100, (5050, 199)), (320, (51360, 639)), (6, (21, 11))])
def test_contiguity_counts(n, expected):
    without, with_, red = contiguity_reduction_stats(n, [1, 2])
    assert (without, with_) == expected
    assert red == pytest.approx(1 - expected[1] / expected[0])


def test_contiguity_six_slot_row():
    assert contiguity_reduction_stats(6, [1, 2])[2] == pytest.approx(0.476, abs=5e-4)
    with pytest.raises(ValueError):
        contiguity_reduction_stats(1, [1, 2])


@pytest.mark.parametrize("deg,expected", [(2, 0.9047), (4, 0.8095), (21, 0.0)])
def test_continuity_reduction(deg, expected):
    assert continuity_reduction_stats(21, deg) == pytest.approx(expected, abs=1e-4)


def test_continuity_reduction_rejects_bad_degree():
    with pytest.raises(ValueError):
        continuity_reduction_stats(21, 0)
