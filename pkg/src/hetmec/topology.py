"""Layered tree topology of a heterogeneous edge network.

Layer 0 holds the single cloud center (CC), layers 1..N hold MEC servers and
layer N+1 holds the edge devices (EDs) that generate raw data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

NodeId = tuple[int, int]


class TopologyError(ValueError):
    """Raised when a raw topology description does not form a valid tree."""


@dataclass(frozen=True)
class NodeSpec:
    compute_cap_max: float
    trans_resource_total: float = 0.0

    def __post_init__(self) -> None:
        if not (self.compute_cap_max >= 0.0):
            raise TopologyError(f"negative compute capacity {self.compute_cap_max}")
        if not (self.trans_resource_total >= 0.0):
            raise TopologyError(f"negative transmission resource {self.trans_resource_total}")


@dataclass(frozen=True)
class Scenario:
    """Per-ED generation rates (Mbit/s, ED index order) and compression ratio."""

    gen_rate: tuple[float, ...]
    compression_ratio: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "gen_rate", tuple(float(x) for x in self.gen_rate))
        if any(not (x >= 0.0) for x in self.gen_rate):
            raise ValueError("generation rates must be nonnegative")
        if not (0.0 <= self.compression_ratio <= 1.0):
            raise ValueError(f"rho out of range: {self.compression_ratio}")

    @property
    def rho(self) -> float:
        return self.compression_ratio

    def scaled(self, t: float) -> Scenario:
        return Scenario(tuple(t * x for x in self.gen_rate), self.compression_ratio)


@dataclass(frozen=True)
class Topology:
    """Validated layered tree. Build it with :func:`build_topology`.

    ``layers[n]`` lists the NodeSpecs of layer ``n``; ``parents[n][i]`` is the
    index (on layer ``n-1``) of the parent of node ``(n, i)``. ``parents[0]`` is
    empty.
    """

    layers: tuple[tuple[NodeSpec, ...], ...]
    parents: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] = field(default=())

    @property
    def layer_count(self) -> int:
        """Number of MEC layers N."""
        return len(self.layers) - 2

    @property
    def ed_layer(self) -> int:
        return len(self.layers) - 1

    def layer_sizes(self) -> list[int]:
        return [len(layer) for layer in self.layers]

    def node(self, nid: NodeId) -> NodeSpec:
        return self.layers[nid[0]][nid[1]]

    def parent_of(self, nid: NodeId) -> NodeId:
        n, i = nid
        if n == 0:
            raise KeyError("the CC has no parent")
        return (n - 1, self.parents[n][i])

    @cached_property
    def children(self) -> dict[NodeId, tuple[NodeId, ...]]:
        kids: dict[NodeId, list[NodeId]] = {
            (n, i): [] for n, layer in enumerate(self.layers) for i in range(len(layer))
        }
        for n in range(1, len(self.layers)):
            for i, p in enumerate(self.parents[n]):
                kids[(n - 1, p)].append((n, i))
        return {k: tuple(v) for k, v in kids.items()}

    def child_counts(self, n: int) -> list[int]:
        """Q_n^i for every node on layer n."""
        return [len(self.children[(n, i)]) for i in range(len(self.layers[n]))]

    @cached_property
    def variables(self) -> tuple[NodeId, ...]:
        """Non-CC nodes in (layer, index) order; one split variable each."""
        return tuple((n, i) for n in range(1, len(self.layers)) for i in range(len(self.layers[n])))

    @cached_property
    def var_index(self) -> dict[NodeId, int]:
        return {nid: k for k, nid in enumerate(self.variables)}

    @property
    def dim(self) -> int:
        return len(self.variables)

    @cached_property
    def eds(self) -> tuple[NodeId, ...]:
        n = self.ed_layer
        return tuple((n, i) for i in range(len(self.layers[n])))

    @cached_property
    def parent_nodes(self) -> tuple[NodeId, ...]:
        """Nodes with at least one child, top-down; each owns a transmission row."""
        return tuple(nid for nid, kids in sorted(self.children.items()) if kids)

    # Flat index helpers used by the vectorised flow code.

    @cached_property
    def parent_var(self) -> np.ndarray:
        """Variable index of each variable's parent, or -1 when the parent is the CC."""
        out = np.full(self.dim, -1, dtype=np.int64)
        for k, nid in enumerate(self.variables):
            par = self.parent_of(nid)
            if par[0] > 0:
                out[k] = self.var_index[par]
        return out

    @cached_property
    def subtree(self) -> np.ndarray:
        """``S[i, j] = 1`` when variable j lies in the subtree rooted at variable i."""
        d = self.dim
        S = np.eye(d)
        pv = self.parent_var
        for j in range(d):
            a = pv[j]
            while a >= 0:
                S[a, j] = 1.0
                a = pv[a]
        return S

    @cached_property
    def ed_vars(self) -> np.ndarray:
        return np.array([self.var_index[e] for e in self.eds], dtype=np.int64)

    @cached_property
    def compute_caps(self) -> np.ndarray:
        return np.array([self.node(nid).compute_cap_max for nid in self.variables])

    @property
    def cc(self) -> NodeSpec:
        return self.layers[0][0]

    def total_compute(self) -> float:
        return float(sum(n.compute_cap_max for layer in self.layers for n in layer))

    def subtree_generation(self, scenario: Scenario) -> np.ndarray:
        """Raw generation G_i (Mbit/s) summed over the EDs below each variable."""
        check_scenario(self, scenario)
        g = np.zeros(self.dim)
        g[self.ed_vars] = scenario.gen_rate
        return self.subtree @ g

    def insert_layer(self, position: int, nodes: Sequence[NodeSpec], parents: Sequence[int],
                     child_parents: Sequence[int], name: str = "inserted") -> Topology:
        """Return a copy with a new layer placed between ``position-1`` and ``position``.

        ``parents[i]`` wires new node i to a node on layer ``position-1``;
        ``child_parents[j]`` wires old node ``(position, j)`` to a new node.
        """
        if not 1 <= position <= len(self.layers) - 1:
            raise TopologyError(f"insertion position {position} outside 1..{len(self.layers) - 1}")
        if len(child_parents) != len(self.layers[position]):
            raise TopologyError(
                f"insertion needs one new-layer parent for each of the "
                f"{len(self.layers[position])} nodes on layer {position}, got {len(child_parents)}"
            )
        raw: list[list[dict[str, Any]]] = []
        for n, layer in enumerate(self.layers):
            if n == position:
                raw.append([
                    {"compute_mbps": s.compute_cap_max, "trans_mbps": s.trans_resource_total,
                     "parent": p}
                    for s, p in zip(nodes, parents, strict=True)
                ])
            raw.append([
                {"compute_mbps": s.compute_cap_max, "trans_mbps": s.trans_resource_total,
                 "parent": (child_parents[i] if n == position else self.parents[n][i]) if n else None}
                for i, s in enumerate(layer)
            ])
        names = list(self.names) if self.names else [f"layer{n}" for n in range(len(self.layers))]
        names.insert(position, name)
        return build_topology(raw, names=names)


def _parent_ref(raw: Any, n: int, i: int) -> int:
    where = f"layer {n} node {i}"
    if raw is None:
        raise TopologyError(f"{where}: orphan node (no parent)")
    if isinstance(raw, bool):
        raise TopologyError(f"{where}: invalid parent reference {raw!r}")
    if isinstance(raw, (int, np.integer)):
        return int(raw)
    if isinstance(raw, Mapping):
        raw = (raw.get("layer"), raw.get("index"))
    if isinstance(raw, Sequence) and not isinstance(raw, str):
        if len(raw) == 0:
            raise TopologyError(f"{where}: orphan node (no parent)")
        if all(isinstance(x, Sequence) and not isinstance(x, str) for x in raw):
            if len(raw) > 1:
                raise TopologyError(f"{where}: multiple parents {list(raw)}")
            raw = raw[0]
        if len(raw) != 2:
            raise TopologyError(f"{where}: parent must be an index or a [layer, index] pair")
        layer, idx = raw
        if layer != n - 1:
            raise TopologyError(
                f"{where}: layer-skipping edge to layer {layer} (parents must sit on layer {n - 1})"
            )
        return int(idx)
    raise TopologyError(f"{where}: invalid parent reference {raw!r}")


def build_topology(layers: Sequence[Sequence[Mapping[str, Any]]],
                   names: Sequence[str] | None = None) -> Topology:
    """Validate a raw top-down layer description and return a :class:`Topology`.

    Each node mapping carries ``compute_mbps``, optional ``trans_mbps`` and, for
    every layer but the first, ``parent``: either the index of the parent on
    the layer directly above or an explicit ``[layer, index]`` pair.
    """
    if len(layers) < 2:
        raise TopologyError("need at least a CC layer and an ED layer")
    if len(layers[0]) != 1:
        raise TopologyError(f"layer 0 must hold exactly one CC, found {len(layers[0])}")
    specs: list[tuple[NodeSpec, ...]] = []
    parents: list[tuple[int, ...]] = []
    last = len(layers) - 1
    for n, layer in enumerate(layers):
        if len(layer) == 0:
            raise TopologyError(f"layer {n} is empty")
        row: list[NodeSpec] = []
        prow: list[int] = []
        for i, node in enumerate(layer):
            where = f"layer {n} node {i}"
            try:
                compute = float(node.get("compute_mbps", 0.0))
                trans = float(node.get("trans_mbps") or 0.0)
            except (TypeError, ValueError) as exc:
                raise TopologyError(f"{where}: non-numeric capacity") from exc
            if compute < 0 or not np.isfinite(compute):
                raise TopologyError(f"{where}: negative or non-finite compute capacity {compute}")
            if trans < 0 or not np.isfinite(trans):
                raise TopologyError(f"{where}: negative or non-finite transmission resource {trans}")
            if n == last and trans != 0.0:
                raise TopologyError(f"{where}: EDs have no children and carry no transmission resource")
            row.append(NodeSpec(compute, trans))
            if n == 0:
                if node.get("parent") is not None:
                    raise TopologyError(f"{where}: the CC cannot have a parent")
                continue
            p = _parent_ref(node.get("parent"), n, i)
            if not 0 <= p < len(layers[n - 1]):
                raise TopologyError(f"{where}: parent index {p} not on layer {n - 1}")
            prow.append(p)
        specs.append(tuple(row))
        parents.append(tuple(prow))
    if names is not None and len(names) != len(layers):
        raise TopologyError("one name per layer required")
    return Topology(tuple(specs), tuple(parents), tuple(names or ()))


def check_scenario(topology: Topology, scenario: Scenario) -> None:
    if len(scenario.gen_rate) != len(topology.eds):
        raise ValueError(
            f"scenario has {len(scenario.gen_rate)} ED rates, topology has {len(topology.eds)} EDs"
        )


def full_tree(q: int, n_mec: int, compute: Sequence[float] | float = 1.0,
              trans: Sequence[float] | float = 1.0) -> Topology:
    """Full Q-ary tree with ``n_mec`` MEC layers; capacities given per layer (top-down)."""
    depth = n_mec + 2
    comp = [compute] * depth if np.isscalar(compute) else list(compute)
    tr = [trans] * depth if np.isscalar(trans) else list(trans)
    raw = []
    for n in range(depth):
        t = 0.0 if n == depth - 1 else tr[n]
        raw.append([
            {"compute_mbps": comp[n], "trans_mbps": t, "parent": (i // q if n else None)}
            for i in range(q ** n)
        ])
    return build_topology(raw)


def chain(compute: Sequence[float], trans: Sequence[float]) -> Topology:
    """Single-branch tree: ``compute`` top-down (CC first, ED last), ``trans`` for CC..layer N."""
    if len(trans) != len(compute) - 1:
        raise TopologyError("chain needs one transmission value per non-ED layer")
    raw = [[{"compute_mbps": c, "trans_mbps": (trans[n] if n < len(trans) else 0.0),
             "parent": (0 if n else None)}] for n, c in enumerate(compute)]
    return build_topology(raw)
