"""Exhaustive grid search over split assignments, for cross-checking the vertex solver."""

from __future__ import annotations

import numba
import numpy as np

from .constraints import DEFAULT_TOL, assemble_constraints
from .latency import _parent_incidence, cauchy_allocate, system_latency
from .solver import TIE_TOL, Solution
from .topology import Scenario, Topology

DEFAULT_BUDGET = 120_000_000


class OracleBudgetError(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"grid needs {required} evaluations, budget is {budget}")
        self.required = required
        self.budget = budget


def grid_axis(step: float) -> np.ndarray:
    if not 0.0 < step <= 1.0:
        raise ValueError(f"grid step must lie in (0, 1], got {step}")
    n = int(np.floor(1.0 / step + 1e-9)) + 1
    axis = np.arange(n) * step
    if axis[-1] < 1.0 - 1e-12:
        axis = np.append(axis, 1.0)
    axis[-1] = 1.0
    return axis


def oracle_grid_search(topology: Topology, scenario: Scenario, step: float,
                       budget: int = DEFAULT_BUDGET, tol: float = DEFAULT_TOL) -> Solution:
    """Evaluate L_min at every feasible point of a uniform grid on [0, 1]^D.

    ``diagnostics["lipschitz"]`` holds the largest ``|dL| / step`` between
    feasible grid neighbours along any axis.
    """
    axis = grid_axis(step)
    d = topology.dim
    n = len(axis)
    required = n**d
    if required > budget:
        raise OracleBudgetError(required, budget)

    cs = assemble_constraints(topology, scenario)
    C, phi = _parent_incidence(topology)
    lam0 = np.zeros(d)
    lam0[topology.ed_vars] = scenario.gen_rate
    args = (
        axis,
        np.array(sorted(range(d), key=lambda k: -topology.variables[k][0]), dtype=np.int64),
        topology.parent_var,
        lam0,
        float(scenario.rho),
        cs.A[::-1].copy(),  # reversed: rows likeliest to fail come first
        (cs.b + cs.allowance(tol))[::-1].copy(),
        topology.compute_caps,
        float(topology.cc.compute_cap_max),
        np.argmax(C, axis=0).astype(np.int64),
        phi,
    )
    slab_shape = (n,) * (d - 1)
    digits = np.zeros(d, dtype=np.int64)

    best_value = np.inf
    best_s = None
    feasible = 0
    lipschitz = 0.0
    prev = None
    for i0 in range(n):
        L = _slab(i0, *args)
        ok = ~np.isnan(L)
        if ok.any():
            feasible += int(ok.sum())
            m = np.nanmin(L)
            if best_s is None or m < best_value - TIE_TOL * max(1.0, abs(best_value)):
                first = int(np.flatnonzero(L <= m + TIE_TOL * max(1.0, abs(m)))[0])
                digits[0] = i0
                digits[1:] = np.unravel_index(first, slab_shape) if d > 1 else ()
                best_value, best_s = float(L[first]), axis[digits].copy()
        grid = L.reshape(slab_shape)
        lipschitz = max(lipschitz, _max_step_change(grid, step))
        if prev is not None:
            lipschitz = max(lipschitz, _max_abs_finite(grid - prev) / (axis[1] - axis[0]))
        prev = grid

    diag = {"grid_points": required, "feasible_points": feasible, "step": step,
            "lipschitz": lipschitz}
    if best_s is None:
        return Solution("congested", vertices_examined=required, diagnostics=diag)
    alloc = cauchy_allocate(topology, scenario, best_s)
    return Solution("optimal", s_star=best_s, allocation=alloc,
                    latency=system_latency(topology, scenario, best_s, alloc),
                    vertices_examined=required, feasible_vertices=feasible, diagnostics=diag)


def _max_abs_finite(x: np.ndarray) -> float:
    x = np.abs(x[np.isfinite(x)])
    return float(x.max()) if x.size else 0.0


def _max_step_change(grid: np.ndarray, step: float) -> float:
    out = 0.0
    for ax in range(grid.ndim):
        out = max(out, _max_abs_finite(np.diff(grid, axis=ax)) / step)
    return out


@numba.njit(cache=True)
def _ratio(num, den):
    if num <= 0.0:
        return 0.0
    if den <= 0.0:
        return np.inf
    return num / den


@numba.njit(cache=True)
def _slab(i0, axis, order, parent_var, lam0, rho, A, bound, caps, cc_cap, parent_slot, phi):
    """L_min on the grid slab with first coordinate ``axis[i0]``; NaN where infeasible."""
    n = axis.size
    d = lam0.size
    k_rows = A.shape[0]
    count = n ** (d - 1)
    out = np.empty(count)
    s = np.empty(d)
    lam = np.empty(d)
    beta = np.empty(d)
    p = np.empty(d)
    roots = np.empty(phi.size)
    s[0] = axis[i0]
    for flat in range(count):
        rem = flat
        for j in range(d - 1, 0, -1):
            s[j] = axis[rem % n]
            rem //= n
        cc_raw = 0.0
        for k in range(d):
            lam[k] = lam0[k]
            beta[k] = 0.0
        for k in order:
            raw_up = (1.0 - s[k]) * lam[k]
            par = parent_var[k]
            if par < 0:
                cc_raw += raw_up
            else:
                lam[par] += raw_up
                beta[par] += beta[k] + rho * s[k] * lam[k]
            p[k] = s[k] * lam[k]
        ok = True
        for r in range(k_rows):
            acc = 0.0
            for j in range(d):
                acc += A[r, j] * p[j]
            if acc > bound[r]:
                ok = False
                break
        if not ok:
            out[flat] = np.nan
            continue
        total = _ratio(cc_raw, cc_cap)
        for m in range(phi.size):
            roots[m] = 0.0
        for k in range(d):
            total += _ratio(p[k], caps[k])
            o = rho * p[k] + (lam[k] - p[k]) + beta[k]
            roots[parent_slot[k]] += np.sqrt(max(o, 0.0))
        for m in range(phi.size):
            total += _ratio(roots[m] * roots[m], phi[m])
        out[flat] = total
    return out
