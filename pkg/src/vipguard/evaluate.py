"""Noise-free evaluation and the non-learning baseline controllers.

`evaluate` plays a batch of episodes with derived per-episode seeds and
reports the cumulative threat and mean per-bodyguard return for each, plus
exact aggregates. Because episode seeds depend only on (seed, episode
index), two controllers evaluated with the same seed face identical worlds,
which makes baseline comparisons paired.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, ContractViolation
from .rewards import cumulative_threat
from .scenario import (
    BodyguardController,
    EpisodeTrace,
    RoleAssignment,
    ScenarioConfig,
    run_episode,
    scenario_digest,
)
from .training import LearnerBundle, select_action
from .world import AgentAction, WorldState, observe_stack

_EVAL_STREAM = 20
_RING_GAIN = 2.0  # proportional gain for the scripted ring's station-keeping

BASELINE_NAMES = ("random", "stationary", "scripted-ring")


@dataclass(eq=False)
class EvalReport:
    """Per-episode metrics plus aggregates recomputable from them exactly."""

    controller_name: str
    scenario_digest: str
    seed: int
    episode_seeds: list[int]
    cumulative_threats: list[float]
    mean_rewards: list[float]
    threat_mean: float
    threat_median: float
    threat_std: float
    reward_mean: float
    reward_median: float
    reward_std: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def __eq__(self, other):
        if not isinstance(other, EvalReport):
            return NotImplemented
        return self.__dict__ == other.__dict__


def _mean_bodyguard_return(trace: EpisodeTrace) -> float:
    per_guard = np.sum([record.rewards for record in trace.records], axis=0)
    return float(np.mean(per_guard))


def evaluate(
    scenario_cfg: ScenarioConfig,
    controller: BodyguardController,
    episodes: int,
    seed: int,
    controller_name: str = "policy",
) -> EvalReport:
    """Run `episodes` noise-free episodes on derived seeds and aggregate.

    Aggregates use np.mean / np.median / np.std (population std), so they can
    be recomputed exactly from the per-episode values.
    """
    if episodes < 1:
        raise ContractViolation(f"episodes must be at least 1, got {episodes}")
    seed_rng = np.random.default_rng(np.random.SeedSequence([seed, _EVAL_STREAM]))
    episode_seeds = [int(s) for s in seed_rng.integers(2**62, size=episodes)]
    threats, rewards = [], []
    for episode_seed in episode_seeds:
        trace = run_episode(scenario_cfg, controller, episode_seed)
        threats.append(cumulative_threat(trace))
        rewards.append(_mean_bodyguard_return(trace))
    return EvalReport(
        controller_name=controller_name,
        scenario_digest=scenario_digest(scenario_cfg),
        seed=seed,
        episode_seeds=episode_seeds,
        cumulative_threats=threats,
        mean_rewards=rewards,
        threat_mean=float(np.mean(threats)),
        threat_median=float(np.median(threats)),
        threat_std=float(np.std(threats)),
        reward_mean=float(np.mean(rewards)),
        reward_median=float(np.median(rewards)),
        reward_std=float(np.std(rewards)),
    )


def policy_controller(bundle: LearnerBundle) -> BodyguardController:
    """Wrap trained actors as a deterministic (noise-free) controller."""

    def controller(
        state: WorldState, roles: RoleAssignment, step_index: int, rng: np.random.Generator
    ) -> Sequence[AgentAction]:
        obs = observe_stack(state, roles.bodyguard_indices)
        return [
            select_action(bundle.actors[i], obs[i], 0.0, rng)
            for i in range(len(roles.bodyguard_indices))
        ]

    return controller


def stationary_controller(scenario_cfg: ScenarioConfig) -> BodyguardController:
    """Zero force every step; bodyguards only drift to rest and get bumped."""

    def controller(state, roles, step_index, rng):
        return [
            AgentAction(force=np.zeros(2), utterance=np.zeros(scenario_cfg.c_dim))
            for _ in roles.bodyguard_indices
        ]

    return controller


def random_controller(scenario_cfg: ScenarioConfig) -> BodyguardController:
    """Uniform force in [-1, 1]^2 from the episode's controller stream."""

    def controller(state, roles, step_index, rng):
        return [
            AgentAction(
                force=rng.uniform(-1.0, 1.0, size=2), utterance=np.zeros(scenario_cfg.c_dim)
            )
            for _ in roles.bodyguard_indices
        ]

    return controller


def scripted_ring_controller(scenario_cfg: ScenarioConfig) -> BodyguardController:
    """Hold evenly spaced stations on a circle around the VIP.

    Station radius is the middle of the no-penalty band; each bodyguard
    steers at its station with a clipped proportional force. A competence
    baseline that escorts without learning.
    """
    params = scenario_cfg.threat
    ring_radius = 0.5 * (params.min_distance + params.safe_distance)

    def controller(state, roles, step_index, rng):
        vip_pos = state.agents[roles.vip_index].position
        count = len(roles.bodyguard_indices)
        actions = []
        for slot, guard in enumerate(roles.bodyguard_indices):
            angle = 2.0 * np.pi * slot / count
            station = vip_pos + ring_radius * np.array([np.cos(angle), np.sin(angle)])
            force = np.clip(_RING_GAIN * (station - state.agents[guard].position), -1.0, 1.0)
            actions.append(AgentAction(force=force, utterance=np.zeros(scenario_cfg.c_dim)))
        return actions

    return controller


def make_baseline(name: str, scenario_cfg: ScenarioConfig) -> BodyguardController:
    if name == "random":
        return random_controller(scenario_cfg)
    if name == "stationary":
        return stationary_controller(scenario_cfg)
    if name == "scripted-ring":
        return scripted_ring_controller(scenario_cfg)
    raise ConfigError(f"unknown baseline {name!r}; choose from {BASELINE_NAMES}")
