"""Brute-force vertex enumeration of the congestion-free polytope.

Every D-subset of rows with a nonsingular coefficient block is solved as an
equality system; solutions passing every row are vertices. Work happens in
processed-volume coordinates, where the polytope is exactly linear.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .constraints import DEFAULT_TOL, LinearConstraintSet
from .flows import p_to_s

log = logging.getLogger(__name__)

DEFAULT_CAP = 2_000_000
DEDUP_DIST = 1e-8
_CHUNK = 4096
_DET_EPS = 1e-10


def vertex_cap() -> int:
    """Subset cap, overridable through ``HETMEC_VERTEX_CAP``."""
    raw = os.environ.get("HETMEC_VERTEX_CAP")
    return int(float(raw)) if raw else DEFAULT_CAP


@dataclass(frozen=True)
class Vertex:
    p: np.ndarray
    s: np.ndarray
    active_rows: tuple[int, ...]


@dataclass
class VertexSet:
    vertices: list[Vertex] = field(default_factory=list)
    subsets_total: int = 0
    subsets_examined: int = 0
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self) -> Iterator[Vertex]:
        return iter(self.vertices)


def _subset_chunks(k: int, d: int, limit: int) -> Iterator[np.ndarray]:
    combos = itertools.islice(itertools.combinations(range(k), d), limit)
    while True:
        block = list(itertools.islice(combos, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.int64)


def _basic_points(A: np.ndarray, b: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Solve each nonsingular square block; rows of NaN mark singular subsets."""
    M = A[idx]
    rhs = b[idx]
    det = np.linalg.det(M)
    ok = np.abs(det) > _DET_EPS
    out = np.full((len(idx), A.shape[1]), np.nan)
    if ok.any():
        out[ok] = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    return out


def iter_basic_feasible(cs: LinearConstraintSet, tol: float = DEFAULT_TOL,
                        cap: int | None = None) -> Iterator[tuple[np.ndarray, int]]:
    """Yield ``(points, n_subsets)`` per chunk: feasible basic points (undeduplicated)."""
    cap = vertex_cap() if cap is None else cap
    k, d = cs.A.shape
    for idx in _subset_chunks(k, d, cap):
        pts = _basic_points(cs.A, cs.b, idx)
        good = ~np.isnan(pts).any(axis=1)
        pts = pts[good]
        if len(pts):
            pts = pts[cs.feasible_mask(pts, tol)]
        yield pts, len(idx)


def has_feasible_point(cs: LinearConstraintSet, tol: float = DEFAULT_TOL,
                       cap: int | None = None) -> bool:
    """Nonemptiness of the (bounded) polytope: true iff some vertex is feasible."""
    return any(len(pts) for pts, _ in iter_basic_feasible(cs, tol, cap))


def enumerate_vertices(cs: LinearConstraintSet, tol: float = DEFAULT_TOL,
                       cap: int | None = None) -> VertexSet:
    if cs.dim < 1:
        raise ValueError("vertex enumeration needs at least one variable")
    cap = vertex_cap() if cap is None else cap
    k, d = cs.A.shape
    total = math.comb(k, d)
    out = VertexSet(subsets_total=total, truncated=total > cap)
    if out.truncated:
        log.warning("vertex enumeration truncated: %d subsets exceed cap %d", total, cap)
    kept: list[np.ndarray] = []
    for pts, n in iter_basic_feasible(cs, tol, cap):
        out.subsets_examined += n
        for pt in pts:
            if kept and np.min(np.linalg.norm(np.array(kept) - pt, axis=1)) < DEDUP_DIST:
                continue
            kept.append(pt)
    kept.sort(key=tuple)
    for pt in kept:
        slack = cs.slack(pt)
        active = np.flatnonzero(np.abs(slack) <= 1e-8 * (np.abs(cs.b) + 1.0))
        s = p_to_s(cs.topology, cs.scenario, pt)
        out.vertices.append(Vertex(pt, s, tuple(int(a) for a in active)))
    return out
