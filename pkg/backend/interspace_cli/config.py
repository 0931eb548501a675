"""Run configuration for CLI subcommands.

A run config is a YAML document with one section per nested model.
Unknown keys are rejected at every level so typos never silently fall
back to defaults.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from interspace.core.config import default_config_path
from interspace.errors import ConfigError


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelConfig(StrictModel):
    kind: Literal["schauder-bm", "kl-sine-bm", "kl-bridge", "custom"] = "schauder-bm"
    dimension: Optional[int] = Field(default=None, ge=1)
    basis_file: Optional[Path] = None


class ScheduleConfig(StrictModel):
    alpha: float = Field(default=0.3, gt=0.0, lt=1.0)
    variant: Literal["sum", "sup"] = "sum"
    eta: float = Field(default=0.1, gt=0.0)
    blocks: int = Field(default=8, ge=1)
    kind: Literal["greedy", "dyadic"] = "greedy"
    file: Optional[Path] = Field(default=None, description="Replay a saved schedule JSON")


class TailConfig(StrictModel):
    replicates: int = Field(default=512, ge=2)
    j_max: Optional[int] = Field(default=None, ge=1)
    confidence: float = Field(default=0.99, gt=0.5, lt=1.0)
    recertify: bool = False


class SamplingConfig(StrictModel):
    seed: int = Field(default=0, ge=0, lt=2**64)
    replicates: int = Field(default=10_000, ge=2)
    level: int = Field(default=12, ge=0, le=16)
    workers: Optional[int] = Field(default=None, ge=1)
    chunk_size: Optional[int] = Field(default=None, ge=1)


# ─────────────────────────────────────────────────
# Experiment parameter blocks, one per subcommand
# ─────────────────────────────────────────────────


class SampleParams(StrictModel):
    truncation: Optional[int] = Field(default=None, ge=1)
    format: Literal["csv", "json"] = "csv"


class NormsParams(StrictModel):
    path_file: Optional[Path] = None
    coeff_file: Optional[Path] = None
    holder_alpha: Optional[float] = Field(default=None, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _one_input(self) -> NormsParams:
        if self.path_file is not None and self.coeff_file is not None:
            raise ValueError("give either path_file or coeff_file, not both")
        return self


class BlocksParams(StrictModel):
    pass


class KeyInequalityParams(StrictModel):
    pass


class ZnParams(StrictModel):
    quantiles: List[float] = Field(default_factory=lambda: [0.01, 0.05, 0.1, 0.25, 0.5])


class BorelCantelliParams(StrictModel):
    eps: float = Field(default=1.0, gt=0.0)


class FerniqueParams(StrictModel):
    norm: Literal["sup", "sum-block", "sup-block"] = "sup"
    rho_grid: List[float] = Field(
        default_factory=lambda: [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75]
    )


class TightnessParams(StrictModel):
    norm: Literal["sup", "sum-block", "sup-block", "running-max"] = "sup"
    radius: float = Field(default=1.0, gt=0.0)
    eps_grid: Optional[List[float]] = None
    rho_grid: List[float] = Field(
        default_factory=lambda: [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75]
    )
    fernique_replicates: Optional[int] = Field(default=None, ge=2)


class BodyConfig(StrictModel):
    kind: Literal["box", "ellipsoid", "polytope", "space"] = "box"
    half_widths: Optional[List[float]] = None
    normals: Optional[List[List[float]]] = None
    offsets: Optional[List[float]] = None
    center: Optional[List[float]] = None


class ConcentrationParams(StrictModel):
    dim: int = Field(default=2, ge=2, le=4)
    subspace: List[List[float]] = Field(default_factory=lambda: [[1.0, 0.0]])
    body: BodyConfig = Field(default_factory=lambda: BodyConfig(half_widths=[1.0, 1.0]))
    scales: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])


class LineConcentrationParams(StrictModel):
    direction: Optional[List[float]] = None
    coeff_file: Optional[Path] = None
    a_grid: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0])


class BlockVarianceParams(StrictModel):
    k_min: int = Field(default=3, ge=1)
    k_max: int = Field(default=8, ge=1)
    lam: float = Field(default=0.9, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _ordered(self) -> BlockVarianceParams:
        if self.k_max < self.k_min:
            raise ValueError("k_max must be >= k_min")
        return self


class CiesielskiParams(StrictModel):
    path_file: Optional[Path] = None
    coeff_file: Optional[Path] = None
    depth: int = Field(default=6, ge=1, le=16)
    count: int = Field(default=1000, ge=1)

    @model_validator(mode="after")
    def _one_input(self) -> CiesielskiParams:
        if self.path_file is not None and self.coeff_file is not None:
            raise ValueError("give either path_file or coeff_file, not both")
        return self


class KFunctionalParams(StrictModel):
    path_file: Optional[Path] = None
    count: int = Field(default=100, ge=1)
    t_points: int = Field(default=40, ge=3)
    tol: float = Field(default=1e-6, gt=0.0)


class ThetaParams(StrictModel):
    theta: float = Field(default=0.5, gt=0.0, lt=1.0)
    levels: List[int] = Field(default_factory=lambda: [3, 4, 5])
    t_points: int = Field(default=16, ge=3)
    tol: float = Field(default=1e-6, gt=0.0)


EXPERIMENT_PARAMS: Dict[str, Type[StrictModel]] = {
    "sample": SampleParams,
    "blocks": BlocksParams,
    "norms": NormsParams,
    "verify-key-inequality": KeyInequalityParams,
    "zn-convergence": ZnParams,
    "borel-cantelli": BorelCantelliParams,
    "fernique": FerniqueParams,
    "tightness": TightnessParams,
    "concentration": ConcentrationParams,
    "line-concentration": LineConcentrationParams,
    "block-variance": BlockVarianceParams,
    "ciesielski": CiesielskiParams,
    "kfunctional": KFunctionalParams,
    "theta": ThetaParams,
}


class RunConfig(StrictModel):
    """Everything a run depends on; echoed into its report."""

    command: str
    name: Optional[str] = None
    output_dir: Optional[Path] = None
    model: ModelConfig = Field(default_factory=ModelConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    tail: TailConfig = Field(default_factory=TailConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    experiment: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _validate_experiment(self) -> RunConfig:
        params_cls = EXPERIMENT_PARAMS.get(self.command)
        if params_cls is None:
            raise ValueError(f"unknown command '{self.command}'")
        self.experiment = params_cls.model_validate(self.experiment).model_dump()
        return self

    @property
    def params(self) -> Any:
        return EXPERIMENT_PARAMS[self.command].model_validate(self.experiment)

    @property
    def run_name(self) -> str:
        return self.name or self.command

    def echo(self, chunk_size: Optional[int] = None) -> dict:
        """Config as written into reports, with the chunk size the run resolved.

        Output location and worker count never reach it; the worker count is
        recorded in the timing file.
        """
        data = self.model_dump(mode="json", exclude={"output_dir": True, "sampling": {"workers"}})
        if chunk_size is not None:
            data["sampling"]["chunk_size"] = chunk_size
        return data


def parse_override(item: str) -> tuple:
    """'section.key=value' -> (['section', 'key'], value) with YAML-typed value."""
    if "=" not in item:
        raise ConfigError(f"Override '{item}' is not of the form section.key=value")
    dotted, raw = item.split("=", 1)
    keys = [k for k in dotted.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"Override '{item}' has an empty key")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"Override '{item}': {exc}") from exc
    return keys, value


def apply_override(data: Dict[str, Any], keys: List[str], value: Any) -> None:
    node = data
    for key in keys[:-1]:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigError(f"Override path {'.'.join(keys)} crosses a non-section value")
        node = child
    node[keys[-1]] = value


def read_config_file(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError as exc:
        raise ConfigError(f"Config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Config file {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must be a mapping of sections")
    return data


def load_run_config(
    command: str,
    path: Optional[Path] = None,
    overrides: Optional[List[str]] = None,
    flags: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Shipped defaults (or ``path``), then ``--set`` overrides, then dedicated flags."""
    if path is not None:
        data = read_config_file(Path(path))
    else:
        shipped = default_config_path(command)
        data = read_config_file(shipped) if shipped.exists() else {}
    data["command"] = command
    for item in overrides or []:
        apply_override(data, *parse_override(item))
    for dotted, value in (flags or {}).items():
        if value is not None:
            apply_override(data, dotted.split("."), value)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration for '{command}':\n{exc}") from exc
