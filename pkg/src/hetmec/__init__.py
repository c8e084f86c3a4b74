"""Latency-optimal task splitting and resource allocation on layered edge-computing trees."""

from .constraints import (
    LinearConstraintSet,
    assemble_constraints,
    check_feasible,
    constraint_count,
)
from .flows import FlowState, node_outflow, propagate_flows
from .hessian import StarSubproblem, analytic_hessian
from .latency import (
    Allocation,
    LatencyBreakdown,
    cauchy_allocate,
    latency_lower_bound,
    system_latency,
)
from .oracle import oracle_grid_search
from .robustness import (
    InsertionSpec,
    classify_bottleneck,
    evaluate_insertion,
    max_supportable_rate,
)
from .schemes import SchemeId, apply_scheme, processing_rate, sweep
from .solver import Solution, solve_lma
from .topology import NodeSpec, Scenario, Topology, TopologyError, build_topology
from .vertices import enumerate_vertices

__all__ = [
    "Allocation", "FlowState", "InsertionSpec", "LatencyBreakdown", "LinearConstraintSet",
    "NodeSpec", "Scenario", "SchemeId", "Solution", "StarSubproblem", "Topology",
    "TopologyError", "analytic_hessian", "apply_scheme", "assemble_constraints",
    "build_topology", "cauchy_allocate", "check_feasible", "classify_bottleneck",
    "constraint_count", "enumerate_vertices", "evaluate_insertion", "latency_lower_bound",
    "max_supportable_rate", "node_outflow", "oracle_grid_search", "processing_rate",
    "propagate_flows", "solve_lma", "sweep", "system_latency",
]
