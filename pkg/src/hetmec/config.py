"""JSON scenario files and result serialisation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .topology import Scenario, Topology, TopologyError, build_topology


class ConfigError(ValueError):
    """Schema, parse or topology problem in a scenario file; message is path-addressed."""


class NodeModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    compute_mbps: float = Field(ge=0)
    trans_mbps: float | None = Field(default=None, ge=0)
    parent: Union[int, list[int], list[list[int]], None] = None


class LayerModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = ""
    nodes: list[NodeModel] = Field(min_length=1)


class EdsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lambda_mbps: Union[float, list[float]]

    @field_validator("lambda_mbps")
    @classmethod
    def _nonnegative(cls, v):
        values = v if isinstance(v, list) else [v]
        if any(x < 0 for x in values):
            raise ValueError("generation rates must be nonnegative")
        return v


class ScenarioFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    layers: list[LayerModel] = Field(min_length=2)
    eds: EdsModel
    rho: float
    meta: dict[str, Any] | None = None

    @field_validator("rho")
    @classmethod
    def _rho_range(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"rho out of range [0, 1] (got {v})")
        return v


@dataclass(frozen=True)
class LoadedConfig:
    topology: Topology
    scenario: Scenario
    meta: dict[str, Any]


def _format_validation(exc: ValidationError) -> str:
    err = exc.errors()[0]
    path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err["loc"]).lstrip(".")
    msg = err["msg"].removeprefix("Value error, ")
    return f"{path or '<root>'}: {msg}"


def parse_config(text: str, source: str = "<config>") -> LoadedConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        model = ScenarioFile.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {_format_validation(exc)}") from exc
    layers = [[node.model_dump() for node in layer.nodes] for layer in model.layers]
    try:
        topology = build_topology(layers, names=[layer.name or f"layer{n}" for n, layer in enumerate(model.layers)])
    except TopologyError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    n_eds = len(topology.eds)
    lam = model.eds.lambda_mbps
    rates = [float(lam)] * n_eds if not isinstance(lam, list) else [float(x) for x in lam]
    if len(rates) != n_eds:
        raise ConfigError(f"{source}: eds.lambda_mbps: expected {n_eds} values, got {len(rates)}")
    return LoadedConfig(topology, Scenario(tuple(rates), model.rho), model.meta or {})


def load_config(path: str | Path) -> LoadedConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    return parse_config(text, str(path))


def bundled_config(name: str) -> LoadedConfig:
    """One of the example configs shipped with the package, e.g. ``table3_chain.json``."""
    ref = resources.files("hetmec") / "configs" / name
    return parse_config(ref.read_text(encoding="utf-8"), name)


def fmt(x: float) -> str:
    return f"{x:.9g}"


def round_floats(obj: Any) -> Any:
    """Recursively cut floats to 9 significant digits for stable output files."""
    if isinstance(obj, float):
        return obj if obj != obj or obj in (float("inf"), float("-inf")) else float(fmt(obj))
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def dump_json(obj: Any, path: str | Path) -> None:
    text = json.dumps(round_floats(obj), indent=2, sort_keys=True, allow_nan=True)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")
