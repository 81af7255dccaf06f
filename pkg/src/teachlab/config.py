"""Run configuration: JSON file loading, strict validation, flag overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .belief import WeightGrid
from .datagen import DatasetSpec
from .learner import DEFAULT_W0, DEFAULT_W1, DEFAULT_W2_ENLIGHTENED
from .metateach import MetaConfig
from .planner import TeacherConfig


class ConfigError(ValueError):
    """Invalid or unparseable run configuration."""


@dataclass(frozen=True)
class TeacherSettings:
    """Scalar teacher knobs; datasets are generated by the experiment driver."""

    u1: float = 1.0
    u2: float = 0.0
    stage_cost_suggest: float = 1.0
    stage_cost_tutor: float = 5.0
    horizon: int = 30
    rollout_samples: int = 32
    lookahead_depth: int | None = None
    eta: float = 0.5
    grid_w1: tuple[float, float, int] = (0.0, 16.0, 17)  # (lo, hi, points)
    grid_w2: tuple[float, float, int] = (-16.0, -1.0, 16)

    def build(self, aux_datasets=(), eval_datasets=(), u1=None, u2=None) -> TeacherConfig:
        import numpy as np

        grid = WeightGrid(
            w1_values=tuple(np.linspace(*self.grid_w1[:2], int(self.grid_w1[2]))),
            w2_values=tuple(np.linspace(*self.grid_w2[:2], int(self.grid_w2[2]))),
        )
        return TeacherConfig(
            u1=self.u1 if u1 is None else u1,
            u2=self.u2 if u2 is None else u2,
            stage_cost_suggest=self.stage_cost_suggest,
            stage_cost_tutor=self.stage_cost_tutor,
            horizon=self.horizon,
            rollout_samples=self.rollout_samples,
            lookahead_depth=self.lookahead_depth,
            aux_datasets=tuple(aux_datasets),
            eval_datasets=tuple(eval_datasets),
            eta=self.eta,
            grid=grid,
        )


@dataclass(frozen=True)
class LearnerSettings:
    w1: float = DEFAULT_W1
    w0: float = DEFAULT_W0
    w2_enlightened: float = DEFAULT_W2_ENLIGHTENED


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    teacher: TeacherSettings = field(default_factory=TeacherSettings)
    learner: LearnerSettings = field(default_factory=LearnerSettings)
    meta: MetaConfig = field(default_factory=MetaConfig)
    n_seeds: int = 10
    meta_seeds: int = 8
    base_seed: int = 0
    n_aux: int = 10
    n_eval: int = 10


def _build_section(cls, data: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    converted = {}
    for f in fields(cls):
        if f.name not in data:
            continue
        v = data[f.name]
        if isinstance(v, list):
            v = tuple(v)
        converted[f.name] = v
    try:
        return cls(**converted)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


_SECTIONS = {
    "dataset": DatasetSpec,
    "teacher": TeacherSettings,
    "learner": LearnerSettings,
    "meta": MetaConfig,
}


def config_from_dict(data: dict) -> RunConfig:
    top_known = set(_SECTIONS) | {"n_seeds", "meta_seeds", "base_seed", "n_aux", "n_eval"}
    unknown = set(data) - top_known
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name in data:
            if not isinstance(data[name], dict):
                raise ConfigError(f"section '{name}' must be an object")
            kwargs[name] = _build_section(cls, data[name], f"section '{name}'")
    for name in ("n_seeds", "meta_seeds", "base_seed", "n_aux", "n_eval"):
        if name in data:
            if not isinstance(data[name], int) or data[name] < 0:
                raise ConfigError(f"'{name}' must be a non-negative integer")
            kwargs[name] = data[name]
    return RunConfig(**kwargs)


def load_config(path: str | Path | None) -> RunConfig:
    """Parse a JSON config file; None loads pure defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return config_from_dict(data)


def apply_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Flag-level overrides: seed, n_seeds, horizon, eta."""
    out = cfg
    if overrides.get("base_seed") is not None:
        out = replace(out, base_seed=overrides["base_seed"])
    if overrides.get("n_seeds") is not None:
        out = replace(out, n_seeds=overrides["n_seeds"])
    if overrides.get("meta_seeds") is not None:
        out = replace(out, meta_seeds=overrides["meta_seeds"])
    if overrides.get("horizon") is not None:
        out = replace(out, teacher=replace(out.teacher, horizon=overrides["horizon"]))
    if overrides.get("eta") is not None:
        out = replace(out, teacher=replace(out.teacher, eta=overrides["eta"]))
    return out
