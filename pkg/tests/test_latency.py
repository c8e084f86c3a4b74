from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from hetmec.constraints import assemble_constraints
from hetmec.flows import p_to_s
from hetmec.latency import (
    Allocation,
    cauchy_allocate,
    latency_lower_bound,
    lmin_from_p,
    system_latency,
)
from hetmec.topology import Scenario, build_topology, full_tree
from hetmec.vertices import enumerate_vertices
from instances import random_instance


def star(rates, phi, cc=100.0, ed=1.0, rho=0.1):
    topo = build_topology([[{"compute_mbps": cc, "trans_mbps": phi}],
                           [{"compute_mbps": ed, "parent": 0} for _ in rates]])
    return topo, Scenario(tuple(rates), rho)


def test_chain_term_by_term(low_load_chain):
    topo, sc = low_load_chain
    # ED: 0 compute + 1/2 uplink; AP: 0 compute + (0.9 raw... all raw) 1/2 uplink; CC: 1/2 compute
    terms = [0.0 / 0.2, 1.0 / 2.0, 0.0 / 0.4, 1.0 / 2.0, 1.0 / 2.0]
    assert latency_lower_bound(topo, sc, [0.0, 0.0]) == pytest.approx(sum(terms)) == pytest.approx(1.5)
    alloc = cauchy_allocate(topo, sc, [0.0, 0.0])
    assert system_latency(topo, sc, [0.0, 0.0], alloc).total == pytest.approx(1.5)


def test_two_children_transmission_term():
    topo, sc = star([1.0, 4.0], 3.0, cc=5.0)
    assert latency_lower_bound(topo, sc, [0.0, 0.0]) == pytest.approx(1.0 + 3.0)
    alloc = cauchy_allocate(topo, sc, [0.0, 0.0])
    assert alloc.phi == pytest.approx([1.0, 2.0])
    even = Allocation(alloc.theta, alloc.theta_cc, np.array([1.5, 1.5]))
    lat = system_latency(topo, sc, [0.0, 0.0], even)
    assert lat.total - 1.0 == pytest.approx(1 / 1.5 + 4 / 1.5)
    assert lat.total > 4.0


def test_single_child_takes_all(low_load_chain):
    topo, sc = low_load_chain
    assert cauchy_allocate(topo, sc, [0.3, 0.2]).phi == pytest.approx([2.0, 2.0])


def test_three_children_against_numeric_minimum():
    topo, sc = star([1.0, 1.0, 4.0], 4.0)
    phi = cauchy_allocate(topo, sc, [0.0, 0.0, 0.0]).phi
    assert phi == pytest.approx([1.0, 1.0, 2.0])
    o = np.array([1.0, 1.0, 4.0])
    res = minimize(lambda x: np.sum(o / x), x0=np.full(3, 4 / 3), method="SLSQP",
                   bounds=[(1e-6, 4.0)] * 3, constraints=[{"type": "eq", "fun": lambda x: x.sum() - 4.0}])
    assert res.x == pytest.approx(phi, abs=1e-4)


def test_zero_outflow_children_split_evenly():
    topo, sc = star([0.0, 0.0], 2.0)
    assert cauchy_allocate(topo, sc, [0.0, 0.0]).phi == pytest.approx([1.0, 1.0])


def test_zero_capacity_conventions():
    topo, sc = star([1.0], 2.0, ed=0.0)
    assert latency_lower_bound(topo, sc, [0.0]) < np.inf
    assert latency_lower_bound(topo, sc, [0.5]) == np.inf


def test_breakdown_components_nonnegative(small_cc_chain):
    topo, sc = small_cc_chain
    s = [4 / 9, 0.1]
    lat = system_latency(topo, sc, s, cauchy_allocate(topo, sc, s))
    assert all(x >= 0 for x in lat.per_layer) and lat.cc_compute_term >= 0
    assert lat.total == pytest.approx(sum(lat.per_layer) + lat.cc_compute_term)
    assert lat.total == pytest.approx(3.23)


def random_feasible_p(rng, topo, sc, n):
    """Random convex combinations of the polytope's vertices."""
    vs = enumerate_vertices(assemble_constraints(topo, sc))
    V = np.array([v.p for v in vs])
    w = rng.dirichlet(np.ones(len(V)), size=n)
    return w @ V


def random_allocation(rng, topo, alloc):
    theta = alloc.theta * rng.uniform(0.05, 1.0, size=alloc.theta.shape)
    phi = np.zeros_like(alloc.phi)
    for par in topo.parent_nodes:
        kids = [topo.var_index[c] for c in topo.children[par]]
        share = rng.dirichlet(np.ones(len(kids))) * rng.uniform(0.05, 1.0)
        phi[kids] = share * topo.node(par).trans_resource_total
    return Allocation(theta, alloc.theta_cc * rng.uniform(0.05, 1.0), phi)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_any_allocation_is_above_the_bound(seed, d):
    rng = np.random.default_rng(seed)
    topo, sc = random_instance(rng, d)
    for p in random_feasible_p(rng, topo, sc, 8):
        s = p_to_s(topo, sc, p)
        bound = latency_lower_bound(topo, sc, s)
        cauchy = cauchy_allocate(topo, sc, s)
        assert system_latency(topo, sc, s, cauchy).total == pytest.approx(bound, rel=1e-9, abs=1e-9)
        for _ in range(4):
            assert system_latency(topo, sc, s, random_allocation(rng, topo, cauchy)).total >= bound - 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_concave_in_processed_volumes(seed, d):
    rng = np.random.default_rng(seed)
    topo, sc = random_instance(rng, d)
    P1 = random_feasible_p(rng, topo, sc, 20)
    P2 = random_feasible_p(rng, topo, sc, 20)
    a = rng.uniform(0, 1, size=(20, 1))
    gen = topo.subtree_generation(sc)
    mid = lmin_from_p(topo, sc, a * P1 + (1 - a) * P2, gen)
    ends = a[:, 0] * lmin_from_p(topo, sc, P1, gen) + (1 - a[:, 0]) * lmin_from_p(topo, sc, P2, gen)
    assert np.all(mid >= ends - 1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=6, max_size=6), st.floats(0.0, 1.0),
       st.sampled_from([0.0, 0.3, 1.0]))
def test_star_concave_in_splits(s12, alpha, rho):
    topo, sc = star([1.0, 2.0, 0.5], 3.0, rho=rho)
    s1, s2 = np.array(s12[:3]), np.array(s12[3:])
    mid = latency_lower_bound(topo, sc, alpha * s1 + (1 - alpha) * s2)
    ends = alpha * latency_lower_bound(topo, sc, s1) + (1 - alpha) * latency_lower_bound(topo, sc, s2)
    assert mid >= ends - 1e-9


def test_lmin_from_p_agrees_with_s_form():
    topo = full_tree(2, 1, compute=[3.0, 1.0, 0.5], trans=[4.0, 3.0, 0.0])
    sc = Scenario((0.5, 1.0, 0.2, 0.7), 0.3)
    rng = np.random.default_rng(7)
    for p in random_feasible_p(rng, topo, sc, 10):
        s = p_to_s(topo, sc, p)
        assert lmin_from_p(topo, sc, p) == pytest.approx(latency_lower_bound(topo, sc, s))
