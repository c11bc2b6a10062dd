import math

import pytest
from hypothesis import given, settings, strategies as st

from p2pmatch.combos import build_candidates, driver_candidates, feasible_singletons, grow_level, write_candidates
from p2pmatch.demand import make_driver, make_request
from p2pmatch.network import line_network, travel_matrix
from p2pmatch.pruning import candidate_mask

from oracles import feasible_subsets, make_rng, small_instance


def ids(cands):
    return {c.request_ids for c in cands}


def test_singletons_skip_infeasible(line5_case, line5_matrix):
    driver, r1, r2, r3 = line5_case
    out = feasible_singletons(driver, [r1, r3], line5_matrix)
    assert ids(out) == {frozenset({"r1"})}
    assert feasible_singletons(driver, [], line5_matrix) == []


def test_identical_geometry_gives_two_singletons(line5_case, line5_matrix):
    driver, r1, *_ = line5_case
    twin = make_request("r1b", "n1", "n3", 120, line5_matrix)
    assert ids(feasible_singletons(driver, [r1, twin], line5_matrix)) == {
        frozenset({"r1"}), frozenset({"r1b"})}


def test_grow_pair(line5_case, line5_matrix):
    driver, r1, r2, r3 = line5_case
    reqs = [r1, r2, r3]
    level = feasible_singletons(driver, reqs, line5_matrix)
    pairs = grow_level(driver, level, reqs)
    assert ids(pairs) == {frozenset({"r1", "r2"})}
    assert pairs[0].savings_km == 8.0


def test_capacity_one_stops_at_singletons(line5_matrix):
    m = line5_matrix
    d = make_driver("v", "n0", "n4", 0, 1, m, max_excess_s=2000)
    reqs = [make_request(f"r{k}", f"n{k}", f"n{k + 1}", 0, m, max_excess_s=2000, max_wait_s=2000)
            for k in range(3)]
    assert {len(c.request_ids) for c in driver_candidates(d, reqs, m)} == {1}


def test_three_compatible_requests_give_seven(line5_matrix):
    m = line5_matrix
    d = make_driver("v", "n0", "n4", 0, 4, m, max_excess_s=2000)
    reqs = [make_request(f"r{k}", f"n{k}", f"n{k + 1}", 0, m, max_excess_s=2000, max_wait_s=2000)
            for k in range(3)]
    out = build_candidates([d], reqs, m)
    assert len(out) == 7
    oracle = feasible_subsets(d, reqs, m)
    assert {c.request_ids: c.savings_km for c in out} == oracle


def test_far_apart_candidates_only_for_d1():
    net = line_network(21)
    m = travel_matrix(net, net.ids)
    drivers = [make_driver("d1", "n0", "n4", 0, 2, m), make_driver("d2", "n10", "n12", 0, 2, m)]
    reqs = [make_request("r1", "n1", "n3", 120, m), make_request("r2", "n16", "n18", 0, m)]
    out = build_candidates(drivers, reqs, m, candidate_mask(drivers, reqs, net))
    assert {(c.driver_id, c.request_ids) for c in out} == {("d1", frozenset({"r1"}))}
    assert build_candidates(drivers, [], m) == []


def test_budget_caps_output(line5_matrix):
    m = line5_matrix
    d = make_driver("v", "n0", "n4", 0, 4, m, max_excess_s=2000)
    reqs = [make_request(f"r{k}", f"n{k}", f"n{k + 1}", 0, m, max_excess_s=2000, max_wait_s=2000)
            for k in range(3)]
    assert len(build_candidates([d], reqs, m, max_combos=4)) == 4


def test_write_candidates(tmp_path, line5_case, line5_matrix):
    driver, r1, r2, _ = line5_case
    out = build_candidates([driver], [r1, r2], line5_matrix)
    write_candidates(out, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "driver_id,request_ids,route_dist_km,savings_km,stop_sequence"
    assert len(lines) == 4


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_exact_mode_matches_subset_enumeration(seed, m):
    net, matrix, driver, reqs = small_instance(make_rng(seed), m, capacity=3, loose=True)
    out = build_candidates([driver], reqs, matrix)
    assert {c.request_ids: c.savings_km for c in out} == feasible_subsets(driver, reqs, matrix)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_greedy_mode_is_subset_of_exact(seed):
    net, matrix, driver, reqs = small_instance(make_rng(seed), 4, capacity=3, loose=True)
    exact = {c.request_ids: c.savings_km for c in build_candidates([driver], reqs, matrix)}
    for c in build_candidates([driver], reqs, matrix, mode="greedy"):
        assert c.request_ids in exact
        assert c.savings_km <= exact[c.request_ids]


def test_unknown_mode(line5_case, line5_matrix):
    driver, r1, r2, _ = line5_case
    with pytest.raises(ValueError):
        build_candidates([driver], [r1, r2], line5_matrix, mode="fancy")
