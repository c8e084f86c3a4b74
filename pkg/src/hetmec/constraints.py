"""Congestion-free constraint system, linear in processed-volume coordinates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .flows import s_to_p
from .topology import NodeId, Scenario, Topology

BOX_LOWER = "box-lower"
BOX_UPPER = "box-upper"
COMPUTE = "compute"
TRANSMISSION = "transmission"
CC_COMPUTE = "cc-compute"

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Row:
    kind: str
    node: NodeId

    def __str__(self) -> str:
        return f"{self.kind}{self.node}"


@dataclass(frozen=True)
class LinearConstraintSet:
    """Rows ``A @ p <= b`` over the processed volumes of ``topology.variables``.

    ``rows[k]`` tags row k with its provenance. Box rows encode ``0 <= s <= 1``,
    i.e. ``p >= 0`` and "a subtree never processes more than it generates".
    """

    topology: Topology
    scenario: Scenario
    A: np.ndarray
    b: np.ndarray
    rows: tuple[Row, ...]
    generation: np.ndarray = field(repr=False)

    @property
    def variables(self) -> tuple[NodeId, ...]:
        return self.topology.variables

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def indices(self, *kinds: str) -> list[int]:
        return [k for k, r in enumerate(self.rows) if r.kind in kinds]

    def slack(self, p) -> np.ndarray:
        """``b - A p`` for one point or a batch of points."""
        return self.b - np.asarray(p, dtype=float) @ self.A.T

    def allowance(self, tol: float) -> np.ndarray:
        return tol * (np.abs(self.b) + 1.0)

    def feasible_mask(self, P: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
        return np.all(self.slack(P) >= -self.allowance(tol), axis=-1)


def assemble_constraints(topology: Topology, scenario: Scenario) -> LinearConstraintSet:
    gen = topology.subtree_generation(scenario)
    S = topology.subtree
    d = topology.dim
    rho = scenario.rho
    A: list[np.ndarray] = []
    b: list[float] = []
    rows: list[Row] = []
    eye = np.eye(d)
    for k, nid in enumerate(topology.variables):
        A.append(-eye[k])
        b.append(0.0)
        rows.append(Row(BOX_LOWER, nid))
    for k, nid in enumerate(topology.variables):
        A.append(S[k].copy())
        b.append(float(gen[k]))
        rows.append(Row(BOX_UPPER, nid))
    for k, nid in enumerate(topology.variables):
        A.append(eye[k].copy())
        b.append(topology.node(nid).compute_cap_max)
        rows.append(Row(COMPUTE, nid))
    for parent in topology.parent_nodes:
        kids = [topology.var_index[c] for c in topology.children[parent]]
        A.append(-(1.0 - rho) * S[kids].sum(axis=0))
        b.append(topology.node(parent).trans_resource_total - float(gen[kids].sum()))
        rows.append(Row(TRANSMISSION, parent))
    A.append(-np.ones(d))
    b.append(topology.cc.compute_cap_max - float(sum(scenario.gen_rate)))
    rows.append(Row(CC_COMPUTE, (0, 0)))
    return LinearConstraintSet(topology, scenario, np.array(A), np.array(b), tuple(rows), gen)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    slack: np.ndarray
    violated: list[tuple[int, Row, float]]

    def __bool__(self) -> bool:
        return self.feasible


def check_feasible(cs: LinearConstraintSet, s, tol: float = DEFAULT_TOL) -> FeasibilityReport:
    """Check a split assignment against every row; violations carry their (negative) slack."""
    return check_feasible_p(cs, s_to_p(cs.topology, cs.scenario, s), tol)


def check_feasible_p(cs: LinearConstraintSet, p, tol: float = DEFAULT_TOL) -> FeasibilityReport:
    slack = cs.slack(p)
    bad = slack < -cs.allowance(tol)
    violated = [(int(k), cs.rows[k], float(slack[k])) for k in np.flatnonzero(bad)]
    return FeasibilityReport(not violated, slack, violated)


def constraint_count(topology: Topology) -> tuple[int, int, int]:
    """(K_c, K_t, K): compute rows incl. the CC, one transmission row per parent node."""
    k_c = sum(len(layer) for layer in topology.layers)
    k_t = len(topology.parent_nodes)
    return k_c, k_t, k_c + k_t
