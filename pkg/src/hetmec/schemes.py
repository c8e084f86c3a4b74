"""Baseline task-assignment schemes, evaluation metrics and scale sweeps."""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .constraints import DEFAULT_TOL, assemble_constraints, check_feasible
from .latency import latency_lower_bound
from .robustness import MAX_BISECTIONS, conservation_ceiling, max_supportable_rate
from .solver import solve_lma
from .topology import Scenario, Topology

BISECTION_TOL = 1e-6


class SchemeId(str, enum.Enum):
    LMA = "lma"
    CLOUD = "cloud"
    LOCAL = "local"
    CONVENTIONAL_MEC = "conventional-mec"

    @classmethod
    def parse(cls, text: str) -> SchemeId:
        text = text.strip().lower()
        if text == "mec":
            return cls.CONVENTIONAL_MEC
        return cls(text)


def fixed_assignment(scheme: SchemeId, topology: Topology) -> np.ndarray:
    """Split vector of a baseline; independent of the generation rates."""
    scheme = SchemeId(scheme)
    s = np.zeros(topology.dim)
    if scheme is SchemeId.CLOUD:
        return s
    if scheme is SchemeId.LOCAL:
        s[topology.ed_vars] = 1.0
        return s
    if scheme is SchemeId.CONVENTIONAL_MEC:
        # with no MEC layer the CC is the access point, so this degenerates to cloud
        if topology.layer_count >= 1:
            ap_layer = topology.layer_count
            s[[topology.var_index[(ap_layer, i)] for i in range(len(topology.layers[ap_layer]))]] = 1.0
        return s
    raise ValueError(f"{scheme} has no fixed assignment")


def apply_scheme(scheme: SchemeId, topology: Topology, scenario: Scenario,
                 tol: float = DEFAULT_TOL) -> np.ndarray | None:
    """Split assignment of ``scheme`` at this scenario, or ``None`` when congested."""
    scheme = SchemeId(scheme)
    if scheme is SchemeId.LMA:
        sol = solve_lma(topology, scenario, tol)
        return None if sol.congested else sol.s_star
    s = fixed_assignment(scheme, topology)
    if not check_feasible(assemble_constraints(topology, scenario), s, tol):
        return None
    return s


def saturation_scale(scheme: SchemeId, topology: Topology, direction: Scenario,
                     tol: float = BISECTION_TOL) -> float:
    """Largest scale at which ``scheme`` stays congestion-free."""
    scheme = SchemeId(scheme)
    if scheme is SchemeId.LMA:
        return max_supportable_rate(topology, direction.rho, direction.gen_rate, tol)
    s = fixed_assignment(scheme, topology)
    hi = 1.01 * conservation_ceiling(topology, direction.gen_rate)
    lo = 0.0

    def ok(t: float) -> bool:
        return bool(check_feasible(assemble_constraints(topology, direction.scaled(t)), s))

    if hi <= 0.0 or not ok(tol * hi):
        return 0.0
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def processing_rate(scheme: SchemeId, topology: Topology, direction: Scenario,
                    lambda_scale: float, saturation: float | None = None) -> float:
    """Average raw volume the network processes per second, per ED."""
    if saturation is None:
        saturation = saturation_scale(scheme, topology, direction)
    return min(lambda_scale, saturation) * float(np.mean(direction.gen_rate))


@dataclass(frozen=True)
class SweepRow:
    scheme: SchemeId
    lambda_scale: float
    system_latency: float | None  # None when congested
    processing_rate_per_ed: float

    @property
    def status(self) -> str:
        return "congested" if self.system_latency is None else "ok"


def scheme_latency(scheme: SchemeId, topology: Topology, scenario: Scenario) -> float | None:
    s = apply_scheme(scheme, topology, scenario)
    return None if s is None else latency_lower_bound(topology, scenario, s)


def _latency_task(args):
    scheme, topology, direction, scale = args
    return scheme_latency(scheme, topology, direction.scaled(scale))


def _saturation_task(args):
    scheme, topology, direction = args
    return saturation_scale(scheme, topology, direction)


def _run(fn, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def sweep(topology: Topology, direction: Scenario, scales: Sequence[float],
          schemes: Iterable[SchemeId], jobs: int = 1) -> list[SweepRow]:
    """Latency and processing rate of every scheme at every scale.

    Rows are ordered by scheme id, then by scale; ``jobs`` only changes how
    the work is spread over processes.
    """
    schemes = sorted({SchemeId(s) for s in schemes}, key=lambda s: s.value)
    scales = sorted(float(x) for x in scales)
    sats = _run(_saturation_task, [(s, topology, direction) for s in schemes], jobs)
    grid = [(s, t) for s in schemes for t in scales]
    lats = _run(_latency_task, [(s, topology, direction, t) for s, t in grid], jobs)
    sat_of = dict(zip(schemes, sats))
    return [
        SweepRow(s, t, lat, processing_rate(s, topology, direction, t, sat_of[s]))
        for (s, t), lat in zip(grid, lats)
    ]
