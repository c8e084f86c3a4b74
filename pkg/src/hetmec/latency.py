"""System latency, its Cauchy-Schwarz lower envelope, and the matching allocation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .flows import _propagate, outflows_from_p
from .topology import NodeId, Scenario, Topology


@dataclass(frozen=True)
class Allocation:
    """Committed compute per node and link capacity granted to each child.

    ``theta[k]`` and ``phi[k]`` are aligned with ``Topology.variables``;
    ``phi[k]`` is what node k receives from its parent.
    """

    theta: np.ndarray
    theta_cc: float
    phi: np.ndarray

    def as_dict(self, topology: Topology) -> dict:
        return {
            "theta": {_key((0, 0)): self.theta_cc}
            | {_key(nid): float(self.theta[k]) for k, nid in enumerate(topology.variables)},
            "phi": {
                f"{_key(topology.parent_of(nid))}->{_key(nid)}": float(self.phi[k])
                for k, nid in enumerate(topology.variables)
            },
        }


def _key(nid: NodeId) -> str:
    return f"{nid[0]}:{nid[1]}"


@dataclass(frozen=True)
class LatencyBreakdown:
    per_layer: tuple[float, ...]  # L_1 .. L_{N+1}
    cc_compute_term: float
    total: float

    def as_dict(self) -> dict:
        return {
            "per_layer": {str(n + 1): v for n, v in enumerate(self.per_layer)},
            "cc_compute_term": self.cc_compute_term,
            "total": self.total,
        }


def _ratio(num, den):
    """num / den with 0/0 = 0 and x/0 = inf for x > 0."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(num <= 0.0, 0.0, np.where(den <= 0.0, np.inf, out))


@lru_cache(maxsize=64)
def _parent_incidence(topology: Topology) -> tuple[np.ndarray, np.ndarray]:
    """(C, phi_total): ``C[m, k] = 1`` when variable k is a child of parent node m."""
    parents = topology.parent_nodes
    C = np.zeros((len(parents), topology.dim))
    for m, par in enumerate(parents):
        for c in topology.children[par]:
            C[m, topology.var_index[c]] = 1.0
    phi = np.array([topology.node(par).trans_resource_total for par in parents])
    return C, phi


def lmin_from_p(topology: Topology, scenario: Scenario, P, gen: np.ndarray | None = None) -> np.ndarray:
    """L_min evaluated directly in processed-volume coordinates (batched over leading dims)."""
    P = np.asarray(P, dtype=float)
    if gen is None:
        gen = topology.subtree_generation(scenario)
    outflow = np.maximum(outflows_from_p(topology, gen, P, scenario.rho), 0.0)
    cc_raw = np.maximum(sum(scenario.gen_rate) - P.sum(axis=-1), 0.0)
    C, phi = _parent_incidence(topology)
    roots = np.sqrt(outflow) @ C.T
    total = _ratio(cc_raw, topology.cc.compute_cap_max)
    total = total + _ratio(np.maximum(P, 0.0), topology.compute_caps).sum(axis=-1)
    total = total + _ratio(roots**2, phi).sum(axis=-1)
    return total


def _state(topology: Topology, scenario: Scenario, s):
    s = np.asarray(s, dtype=float)
    if s.shape[-1] != topology.dim:
        raise ValueError(f"assignment has {s.shape[-1]} entries, expected {topology.dim}")
    lam, beta, cc_raw, _ = _propagate(topology, scenario, s)
    p = s * lam
    outflow = np.maximum(scenario.rho * p + (lam - p) + beta, 0.0)
    return p, outflow, cc_raw


def latency_lower_bound(topology: Topology, scenario: Scenario, s) -> float:
    """Minimum latency over all resource allocations for a fixed split ``s``.

    Infinite when some used resource has zero capacity.
    """
    p, outflow, cc_raw = _state(topology, scenario, s)
    C, phi = _parent_incidence(topology)
    value = (
        _ratio(cc_raw, topology.cc.compute_cap_max)
        + _ratio(p, topology.compute_caps).sum(axis=-1)
        + _ratio((np.sqrt(outflow) @ C.T) ** 2, phi).sum(axis=-1)
    )
    return float(value) if np.ndim(value) == 0 else value


def cauchy_allocate(topology: Topology, scenario: Scenario, s) -> Allocation:
    """Full compute everywhere; each parent splits its link budget by sqrt(child outflow)."""
    _, outflow, _ = _state(topology, scenario, s)
    phi = np.zeros(topology.dim)
    for par in topology.parent_nodes:
        kids = [topology.var_index[c] for c in topology.children[par]]
        budget = topology.node(par).trans_resource_total
        w = np.sqrt(outflow[kids])
        if w.sum() > 0.0:
            phi[kids] = budget * w / w.sum()
        else:
            phi[kids] = budget / len(kids)
    return Allocation(topology.compute_caps.copy(), topology.cc.compute_cap_max, phi)


def system_latency(topology: Topology, scenario: Scenario, s, alloc: Allocation) -> LatencyBreakdown:
    p, outflow, cc_raw = _state(topology, scenario, s)
    node_terms = _ratio(p, alloc.theta) + _ratio(outflow, alloc.phi)
    per_layer = [0.0] * (topology.ed_layer)
    for k, (n, _) in enumerate(topology.variables):
        per_layer[n - 1] += float(node_terms[k])
    cc_term = float(_ratio(cc_raw, alloc.theta_cc))
    return LatencyBreakdown(tuple(per_layer), cc_term, cc_term + sum(per_layer))


def edge_overloads(topology: Topology, scenario: Scenario, s, alloc: Allocation,
                   tol: float = 1e-9) -> list[NodeId]:
    """Children whose outflow exceeds the link capacity granted to them."""
    _, outflow, _ = _state(topology, scenario, s)
    over = outflow > alloc.phi * (1.0 + tol) + tol
    return [topology.variables[k] for k in np.flatnonzero(over)]
