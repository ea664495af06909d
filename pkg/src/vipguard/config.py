"""Run configuration: one JSON document covering scenario, training, and output.

The schema mirrors the config dataclasses section by section (see
docs/formats.md). Unknown keys anywhere are rejected with the offending
field path, so typos fail loudly instead of silently using a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .render import RenderStyle
from .rewards import ThreatParams
from .scenario import ScenarioConfig
from .training import TrainConfig
from .world import PhysicsConfig

_COLOR_FIELDS = {
    "vip": "vip_color",
    "bodyguard": "bodyguard_color",
    "bystander": "bystander_color",
    "landmark": "landmark_color",
    "goal": "goal_color",
    "background": "background",
}


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    output_dir: str = "runs/default"
    eval_episodes: int = 100
    render_stride: int = 1
    render_style: RenderStyle = field(default_factory=RenderStyle)

    def __post_init__(self):
        if self.eval_episodes < 1:
            raise ConfigError(f"eval_episodes must be positive, got {self.eval_episodes}")
        if self.render_stride < 1:
            raise ConfigError(f"render_stride must be positive, got {self.render_stride}")


def _build_dataclass(cls, data: dict, path: str):
    """Construct a config dataclass from a dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{path}.{key}: unknown key")
        if key == "hidden_sizes":
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_run_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    allowed = {"scenario", "train", "output_dir", "eval_episodes", "render"}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{key}: unknown key")

    scenario_data = dict(data.get("scenario", {}))
    threat = _build_dataclass(ThreatParams, scenario_data.pop("threat", {}), "scenario.threat")
    physics = _build_dataclass(PhysicsConfig, scenario_data.pop("physics", {}), "scenario.physics")
    scenario = _build_dataclass(
        ScenarioConfig, {**scenario_data, "threat": threat, "physics": physics}, "scenario"
    )
    train = _build_dataclass(TrainConfig, data.get("train", {}), "train")

    render_data = dict(data.get("render", {}))
    stride = render_data.pop("stride", 1)
    colors = render_data.pop("colors", {})
    style_kwargs = {}
    for role, value in (colors or {}).items():
        if role not in _COLOR_FIELDS:
            raise ConfigError(f"render.colors.{role}: unknown role")
        style_kwargs[_COLOR_FIELDS[role]] = str(value)
    for key, value in render_data.items():
        if key not in ("canvas_size", "view_extent"):
            raise ConfigError(f"render.{key}: unknown key")
        style_kwargs[key] = value
    style = _build_dataclass(RenderStyle, style_kwargs, "render")

    try:
        return RunConfig(
            scenario=scenario,
            train=train,
            output_dir=str(data.get("output_dir", "runs/default")),
            eval_episodes=int(data.get("eval_episodes", 100)),
            render_stride=int(stride),
            render_style=style,
        )
    except (ConfigError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_run_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON run config; raises ConfigError with a field path."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    return parse_run_config(data)


def default_config_dict() -> dict:
    """The shipped default config as a plain dict (the full mall scenario)."""
    scenario = ScenarioConfig()
    train = TrainConfig()
    return {
        "scenario": {
            "n_bodyguards": scenario.n_bodyguards,
            "n_bystanders": scenario.n_bystanders,
            "n_landmarks": scenario.n_landmarks,
            "horizon": scenario.horizon,
            "c_dim": scenario.c_dim,
            "seed": scenario.seed,
            "threat": {f.name: getattr(scenario.threat, f.name) for f in fields(ThreatParams)},
            "physics": {f.name: getattr(scenario.physics, f.name) for f in fields(PhysicsConfig)},
        },
        "train": {
            f.name: (list(v) if isinstance(v := getattr(train, f.name), tuple) else v)
            for f in fields(TrainConfig)
        },
        "output_dir": "runs/default",
        "eval_episodes": 100,
        "render": {"stride": 1},
    }
