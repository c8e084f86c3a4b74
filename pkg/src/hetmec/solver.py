"""Latency minimisation over the vertices of the congestion-free polytope."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraints import DEFAULT_TOL, LinearConstraintSet, assemble_constraints
from .latency import (
    Allocation,
    LatencyBreakdown,
    cauchy_allocate,
    edge_overloads,
    latency_lower_bound,
    system_latency,
)
from .topology import Scenario, Topology
from .vertices import enumerate_vertices

TIE_TOL = 1e-9


@dataclass
class Solution:
    status: str  # "optimal" or "congested"
    s_star: np.ndarray | None = None
    allocation: Allocation | None = None
    latency: LatencyBreakdown | None = None
    active_rows: tuple[int, ...] = ()
    vertices_examined: int = 0
    feasible_vertices: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def congested(self) -> bool:
        return self.status == "congested"

    @property
    def total_latency(self) -> float:
        return float("nan") if self.latency is None else self.latency.total

    def as_dict(self, topology: Topology, cs: LinearConstraintSet | None = None) -> dict:
        out: dict = {"status": self.status}
        if self.s_star is not None:
            out["s_star"] = {f"{n}:{i}": float(v) for (n, i), v in zip(topology.variables, self.s_star)}
            out["allocation"] = self.allocation.as_dict(topology)
            out["latency"] = self.latency.as_dict()
            out["active_rows"] = (
                [str(cs.rows[k]) for k in self.active_rows] if cs is not None else list(self.active_rows)
            )
        out["diagnostics"] = {
            "vertices_examined": self.vertices_examined,
            "feasible_vertices": self.feasible_vertices,
            **self.diagnostics,
        }
        return out


def _better(value: float, s: np.ndarray, best_value: float, best_s: np.ndarray | None) -> bool:
    if best_s is None or value < best_value - TIE_TOL * max(1.0, abs(best_value)):
        return True
    if value <= best_value + TIE_TOL * max(1.0, abs(best_value)):
        return tuple(s) < tuple(best_s)
    return False


def solve_lma(topology: Topology, scenario: Scenario, tol: float = DEFAULT_TOL,
              cap: int | None = None) -> Solution:
    """Evaluate L_min at every feasible vertex and keep the smallest.

    Congestion means an empty polytope. When the square-root split of a
    parent's link budget leaves some child below its own outflow, the optimum
    is still reported and the child is listed in ``diagnostics["overloaded_links"]``.
    """
    cs = assemble_constraints(topology, scenario)
    vs = enumerate_vertices(cs, tol=tol, cap=cap)
    best = None
    best_value = np.inf
    best_s = None
    for v in vs:
        value = latency_lower_bound(topology, scenario, v.s)
        if _better(value, v.s, best_value, best_s):
            best, best_value, best_s = v, value, v.s
    diag = {
        "subsets_total": vs.subsets_total,
        "subsets_examined": vs.subsets_examined,
        "truncated": vs.truncated,
    }
    if best is None:
        return Solution("congested", vertices_examined=vs.subsets_examined,
                        feasible_vertices=len(vs), diagnostics=diag)
    v = best
    alloc = cauchy_allocate(topology, scenario, v.s)
    overloaded = edge_overloads(topology, scenario, v.s, alloc, tol)
    return Solution(
        "optimal",
        s_star=v.s,
        allocation=alloc,
        latency=system_latency(topology, scenario, v.s, alloc),
        active_rows=v.active_rows,
        vertices_examined=vs.subsets_examined,
        feasible_vertices=len(vs),
        diagnostics=diag | {"p_star": [float(x) for x in v.p],
                            "overloaded_links": [f"{n}:{i}" for n, i in overloaded]},
    )
