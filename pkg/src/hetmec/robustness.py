"""Maximum supportable generation rate, bottleneck attribution and layer insertion."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constraints import (
    CC_COMPUTE,
    COMPUTE,
    DEFAULT_TOL,
    TRANSMISSION,
    assemble_constraints,
)
from .flows import outflows_from_p
from .topology import NodeSpec, Scenario, Topology, TopologyError
from .vertices import enumerate_vertices, has_feasible_point

log = logging.getLogger(__name__)

COMPUTE_SHORTAGE = "compute-shortage"
TRANSMISSION_SHORTAGE = "transmission-shortage"
NO_SHORTAGE = "none"

MAX_BISECTIONS = 60
# relative change in t* below which an insertion counts as having no effect
EFFECT_TOL = 1e-6


def conservation_ceiling(topology: Topology, direction: Sequence[float]) -> float:
    """Upper bound on the scale: every raw bit is processed somewhere."""
    total = float(np.sum(direction))
    if total <= 0.0:
        raise ValueError("direction needs at least one positive entry")
    return topology.total_compute() / total


def feasible_at(topology: Topology, rho: float, direction: Sequence[float], t: float,
                tol: float = DEFAULT_TOL, cap: int | None = None) -> bool:
    scenario = Scenario(tuple(t * x for x in direction), rho)
    return has_feasible_point(assemble_constraints(topology, scenario), tol, cap)


def max_supportable_rate(topology: Topology, rho: float, direction: Sequence[float],
                         tol: float = DEFAULT_TOL, cap: int | None = None) -> float:
    """Largest scale t with a nonempty congestion-free polytope, by bisection."""
    hi = 1.01 * conservation_ceiling(topology, direction)
    if hi <= 0.0:
        return 0.0
    if feasible_at(topology, rho, direction, hi, tol, cap):
        log.warning("scale %g above the conservation ceiling is feasible", hi)
        return hi
    lo = 0.0
    if not feasible_at(topology, rho, direction, tol * hi, tol, cap):
        return 0.0
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if feasible_at(topology, rho, direction, mid, tol, cap):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class BottleneckReport:
    kind: str
    t_star: float
    layer: int | None = None  # n_0, layer of the parent whose budget is exhausted
    binding_rows: list[str] = field(default_factory=list)
    slack: dict[str, float] = field(default_factory=dict)
    note: str = ""

    def as_dict(self) -> dict:
        return {"kind": self.kind, "layer": self.layer, "binding_rows": self.binding_rows,
                "slack": self.slack, "note": self.note, "t_star": self.t_star}


def classify_bottleneck(topology: Topology, rho: float, direction: Sequence[float],
                        t_star: float, tol: float = DEFAULT_TOL,
                        cap: int | None = None) -> BottleneckReport:
    """Attribute t* to exhausted compute, an exhausted link budget, or neither.

    A row counts as binding when no feasible point at ``t_star`` leaves it
    slack; the largest slack over the polytope is attained at a vertex.
    """
    scenario = Scenario(tuple(t_star * x for x in direction), rho)
    cs = assemble_constraints(topology, scenario)
    vs = enumerate_vertices(cs, tol, cap)
    if not len(vs):
        return BottleneckReport(NO_SHORTAGE, t_star, note="no feasible point at t_star")
    max_slack = np.max(cs.slack(np.array([v.p for v in vs])), axis=0)
    thresh = max(1e-6, 1e3 * tol) * (np.abs(cs.b) + 1.0)
    tight = max_slack <= thresh

    gen = cs.generation
    compute_rows = [
        k for k, r in enumerate(cs.rows)
        if (r.kind == COMPUTE and gen[topology.var_index[r.node]] > 0.0)
        or (r.kind == CC_COMPUTE and sum(scenario.gen_rate) > 0.0)
    ]
    trans_tight = [k for k in cs.indices(TRANSMISSION) if tight[k]]
    all_compute = bool(compute_rows) and all(tight[k] for k in compute_rows)

    report = BottleneckReport(
        NO_SHORTAGE, t_star,
        binding_rows=[str(cs.rows[k]) for k in np.flatnonzero(tight)],
        slack={str(r): float(max(v, 0.0)) for r, v in zip(cs.rows, max_slack)},
    )
    if trans_tight:
        report.kind = TRANSMISSION_SHORTAGE
        report.layer = min(cs.rows[k].node[0] for k in trans_tight)
        if all_compute:
            report.note = "mixed: every compute row is also tight"
        elif len({cs.rows[k].node[0] for k in trans_tight}) > 1:
            report.note = "several layers tight; reporting the one closest to the CC"
    elif all_compute:
        report.kind = COMPUTE_SHORTAGE
    else:
        report.note = "neither resource family is exhausted"
    return report


@dataclass(frozen=True)
class InsertionSpec:
    """A new layer placed between layers ``position - 1`` and ``position``."""

    position: int
    nodes: tuple[NodeSpec, ...]
    parents: tuple[int, ...]
    child_parents: tuple[int, ...]
    name: str = "inserted"

    def apply(self, topology: Topology) -> Topology:
        return topology.insert_layer(self.position, self.nodes, self.parents,
                                     self.child_parents, self.name)


@dataclass
class InsertionReport:
    t_before: float
    t_after: float
    predicted: str  # "enhances" | "no-effect"
    observed: str
    observed_consistent: bool
    bottleneck: BottleneckReport
    preconditions_met: bool
    flags: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "t_before": self.t_before, "t_after": self.t_after, "predicted": self.predicted,
            "observed": self.observed, "observed_consistent": self.observed_consistent,
            "preconditions_met": self.preconditions_met, "flags": self.flags,
            "bottleneck_before": self.bottleneck.as_dict(),
        }


def _through_traffic_fits(topology: Topology, insertion: InsertionSpec, rho: float,
                          direction: Sequence[float], t: float, tol: float,
                          cap: int | None) -> bool:
    """Is there a feasible operating point at scale t whose traffic crossing the
    insertion boundary fits strictly inside every new node's link budget?"""
    scenario = Scenario(tuple(t * x for x in direction), rho)
    cs = assemble_constraints(topology, scenario)
    vs = enumerate_vertices(cs, tol, cap)
    layer = insertion.position
    kids = [topology.var_index[(layer, j)] for j in range(len(topology.layers[layer]))]
    for v in vs:
        out = outflows_from_p(topology, cs.generation, v.p, rho)
        load = np.zeros(len(insertion.nodes))
        for j, k in enumerate(kids):
            load[insertion.child_parents[j]] += out[k]
        if all(load[i] < node.trans_resource_total for i, node in enumerate(insertion.nodes)):
            return True
    return False


def evaluate_insertion(topology: Topology, insertion: InsertionSpec, rho: float,
                       direction: Sequence[float], tol: float = DEFAULT_TOL,
                       cap: int | None = None) -> InsertionReport:
    """Compare t* before and after inserting a layer against the positional rule.

    Transmission shortage at layer n_0 can only be relieved by a layer placed
    at boundary n_0 + 1 or deeper; compute shortage by any layer that brings
    compute and enough link budget for the traffic it relays.
    """
    after_topology = insertion.apply(topology)
    t_before = max_supportable_rate(topology, rho, direction, tol, cap)
    report = classify_bottleneck(topology, rho, direction, t_before, tol, cap)
    t_after = max_supportable_rate(after_topology, rho, direction, tol, cap)

    flags = []
    if any(n.compute_cap_max <= 0.0 for n in insertion.nodes):
        flags.append("new layer has a node without compute capacity")
    if not _through_traffic_fits(topology, insertion, rho, direction, t_before, tol, cap):
        flags.append("new layer cannot relay the current lower-layer outflow")
    ok = not flags

    if report.kind == TRANSMISSION_SHORTAGE:
        enhances = ok and insertion.position >= report.layer + 1
    else:
        enhances = ok
    predicted = "enhances" if enhances else "no-effect"
    gained = t_after - t_before > EFFECT_TOL * max(t_before, 1e-12)
    observed = "enhances" if gained else "no-effect"
    return InsertionReport(t_before, t_after, predicted, observed, predicted == observed,
                           report, ok, flags)


def insertion_from_mapping(raw: dict, position: int) -> InsertionSpec:
    """Build an :class:`InsertionSpec` from ``{"name", "nodes": [...], "child_parents": [...]}``."""
    try:
        nodes = raw["nodes"]
        child_parents = raw["child_parents"]
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"insertion layer needs 'nodes' and 'child_parents' ({exc})") from exc
    specs, parents = [], []
    for i, node in enumerate(nodes):
        if "parent" not in node:
            raise TopologyError(f"inserted node {i}: orphan node (no parent)")
        specs.append(NodeSpec(float(node.get("compute_mbps", 0.0)), float(node.get("trans_mbps") or 0.0)))
        parents.append(int(node["parent"]))
    return InsertionSpec(position, tuple(specs), tuple(parents),
                         tuple(int(x) for x in child_parents), str(raw.get("name", "inserted")))
