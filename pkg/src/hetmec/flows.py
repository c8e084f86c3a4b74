"""Steady-state flow propagation through the tree.

Two coordinate systems are used throughout the package:

* ``s`` -- per-node task split, the fraction of raw data reaching a node that
  the node processes itself;
* ``p`` -- per-node processed raw volume ``p_i = s_i * lambda_i(s)`` (Mbit/s).

All congestion-free constraints are linear in ``p``; ``s`` is what gets
reported. Arrays are indexed by ``Topology.variables`` and may carry leading
batch dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import NodeId, Scenario, Topology, check_scenario


@dataclass(frozen=True)
class FlowState:
    raw_arrival: np.ndarray  # lambda_i, raw data reaching each variable node
    processed_in: np.ndarray  # beta_i, processed data arriving from below
    cc_raw: float  # raw data reaching the CC
    cc_processed_in: float

    def at(self, topology: Topology, nid: NodeId) -> tuple[float, float]:
        k = topology.var_index[nid]
        return float(self.raw_arrival[k]), float(self.processed_in[k])


def _bottom_up(topology: Topology) -> list[int]:
    return sorted(range(topology.dim), key=lambda k: -topology.variables[k][0])


def propagate_flows(topology: Topology, scenario: Scenario, s) -> FlowState:
    """Push raw and processed rates from the EDs up to the CC for split ``s``."""
    check_scenario(topology, scenario)
    s = np.asarray(s, dtype=float)
    if s.shape != (topology.dim,):
        raise ValueError(f"assignment has shape {s.shape}, expected ({topology.dim},)")
    lam, beta, cc_raw, cc_beta = _propagate(topology, scenario, s)
    return FlowState(lam, beta, float(cc_raw), float(cc_beta))


def _propagate(topology: Topology, scenario: Scenario, s: np.ndarray):
    rho = scenario.rho
    batch = s.shape[:-1]
    lam = np.zeros(s.shape)
    beta = np.zeros(s.shape)
    lam[..., topology.ed_vars] = scenario.gen_rate
    cc_raw = np.zeros(batch)
    cc_beta = np.zeros(batch)
    pv = topology.parent_var
    for k in _bottom_up(topology):
        sk = s[..., k]
        raw_up = (1.0 - sk) * lam[..., k]
        done_up = beta[..., k] + rho * sk * lam[..., k]
        if pv[k] < 0:
            cc_raw = cc_raw + raw_up
            cc_beta = cc_beta + done_up
        else:
            lam[..., pv[k]] += raw_up
            beta[..., pv[k]] += done_up
    return lam, beta, cc_raw, cc_beta


def node_outflow(s: float, lam: float, beta: float, rho: float) -> float:
    """Uplink load of one node: processed output, leftover raw, and relayed results."""
    return rho * s * lam + (1.0 - s) * lam + beta


def s_to_p(topology: Topology, scenario: Scenario, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    lam, _, _, _ = _propagate(topology, scenario, s)
    return s * lam


def raw_arrival_from_p(topology: Topology, gen: np.ndarray, p: np.ndarray) -> np.ndarray:
    """lambda_i(p) = G_i minus everything processed strictly below i."""
    below = p @ topology.subtree.T - p
    return gen - below


def p_to_s(topology: Topology, scenario: Scenario, p) -> np.ndarray:
    """Recover splits from processed volumes; nodes that receive no raw data get s = 0."""
    p = np.asarray(p, dtype=float)
    lam = raw_arrival_from_p(topology, topology.subtree_generation(scenario), p)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(lam > 0.0, p / np.where(lam > 0.0, lam, 1.0), 0.0)
    return np.clip(s, 0.0, 1.0) + 0.0


def outflows_from_p(topology: Topology, gen: np.ndarray, p: np.ndarray, rho: float) -> np.ndarray:
    """Uplink load of every variable node, ``G_i - (1 - rho) * (processed in subtree i)``."""
    return gen - (1.0 - rho) * (p @ topology.subtree.T)
