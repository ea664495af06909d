"""Mall escort scenario: roles, scripted crowd, and episode orchestration.

Agent index layout is fixed: index 0 is the VIP, the next `n_bodyguards`
indices are bodyguards, the remaining indices are bystanders. The VIP walks
to one goal landmark and stops; bystanders wander between randomly chosen
landmarks forever; bodyguards are driven by an external controller.

Per-episode randomness is split into independent streams derived from the
episode seed: placement (handled by the world module), role assignment,
bystander waypoint resampling, and the controller's own draws.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, ContractViolation, ControllerError
from .rewards import ThreatParams, bodyguard_reward, instantaneous_threat
from .world import (
    AgentAction,
    PhysicsConfig,
    WorldState,
    reset_world,
    step_world,
)

# Scripted-policy constants. The VIP walks slower than the crowd so an escort
# can keep pace; arrival switches a walker into its next leg (or parks it).
ARRIVAL_RADIUS = 0.1
VIP_SPEED_FACTOR = 0.6
BYSTANDER_SPEED_FACTOR = 1.0

# Seed-stream tags (stream 0 is entity placement, in the world module).
_ROLE_STREAM = 1
_WAYPOINT_STREAM = 2
_CONTROLLER_STREAM = 3


@dataclass(frozen=True)
class ScenarioConfig:
    """Scene shape plus nested physics and reward constants.

    The defaults are the full mall scene: 3 bodyguards, 10 bystanders,
    12 landmarks, 25-step episodes.
    """

    n_bodyguards: int = 3
    n_bystanders: int = 10
    n_landmarks: int = 12
    horizon: int = 25
    threat: ThreatParams = field(default_factory=ThreatParams)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    c_dim: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n_bodyguards < 1:
            raise ConfigError(f"need at least one bodyguard, got {self.n_bodyguards}")
        if self.n_bystanders < 0:
            raise ConfigError(f"n_bystanders must be nonnegative, got {self.n_bystanders}")
        if self.n_landmarks < 1:
            raise ConfigError(f"need at least one landmark, got {self.n_landmarks}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be at least 1, got {self.horizon}")
        if not 0 <= self.c_dim <= 4:
            raise ConfigError(f"c_dim must lie in [0, 4], got {self.c_dim}")

    @property
    def n_agents(self) -> int:
        """VIP plus bodyguards plus bystanders."""
        return 1 + self.n_bodyguards + self.n_bystanders


def scenario_digest(cfg: ScenarioConfig) -> str:
    """Stable 16-hex-char fingerprint of the scenario shape, ignoring the seed.

    Used to stamp trajectories and checkpoints so artifacts from a different
    scenario are refused instead of silently misread.
    """
    payload = {}
    for f in fields(cfg):
        if f.name == "seed":
            continue
        value = getattr(cfg, f.name)
        if hasattr(value, "__dataclass_fields__"):
            value = {g.name: getattr(value, g.name) for g in fields(value)}
        payload[f.name] = value
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class RoleAssignment:
    """Who is who, the VIP's goal, and each bystander's current waypoint."""

    vip_index: int
    bodyguard_indices: tuple[int, ...]
    bystander_indices: tuple[int, ...]
    vip_goal_landmark: int
    bystander_waypoints: dict[int, int]


@dataclass(eq=False)
class StepRecord:
    """One step of an episode: post-step state, all actions, rewards, threat."""

    state: WorldState
    actions: list[AgentAction]
    rewards: list[float]
    threat: float

    def __eq__(self, other):
        if not isinstance(other, StepRecord):
            return NotImplemented
        return (
            self.state == other.state
            and self.actions == other.actions
            and self.rewards == other.rewards
            and self.threat == other.threat
        )


@dataclass(eq=False)
class EpisodeTrace:
    """A full episode: `horizon` step records plus seed, digest, final roles."""

    records: list[StepRecord]
    seed: int
    config_digest: str
    roles: RoleAssignment

    @property
    def horizon(self) -> int:
        return len(self.records)

    def __eq__(self, other):
        if not isinstance(other, EpisodeTrace):
            return NotImplemented
        return (
            self.records == other.records
            and self.seed == other.seed
            and self.config_digest == other.config_digest
            and self.roles == other.roles
        )


# A controller maps (state, roles, step_index, rng) to one action per
# bodyguard, in bodyguard_indices order. The rng is seeded per episode, so
# stochastic controllers stay reproducible.
BodyguardController = Callable[
    [WorldState, RoleAssignment, int, np.random.Generator], Sequence[AgentAction]
]


def build_scenario(cfg: ScenarioConfig) -> tuple[WorldState, RoleAssignment]:
    """Reset the world and assign roles, goal, and initial waypoints."""
    world = reset_world(cfg, cfg.seed)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _ROLE_STREAM]))
    n_b = cfg.n_bodyguards
    bodyguards = tuple(range(1, 1 + n_b))
    bystanders = tuple(range(1 + n_b, cfg.n_agents))
    roles = RoleAssignment(
        vip_index=0,
        bodyguard_indices=bodyguards,
        bystander_indices=bystanders,
        vip_goal_landmark=int(rng.integers(cfg.n_landmarks)),
        bystander_waypoints={b: int(rng.integers(cfg.n_landmarks)) for b in bystanders},
    )
    return world, roles


def _walk_toward(position: np.ndarray, target: np.ndarray, speed_factor: float) -> np.ndarray:
    delta = target - position
    dist = float(np.sqrt(delta @ delta))
    if dist <= ARRIVAL_RADIUS:
        return np.zeros(2)
    return delta / dist * speed_factor


def vip_policy(state: WorldState, roles: RoleAssignment, cfg: ScenarioConfig) -> AgentAction:
    """Walk straight at the goal landmark; stop once within the arrival radius."""
    vip = state.agents[roles.vip_index]
    goal = state.landmarks[roles.vip_goal_landmark].position
    return AgentAction(
        force=_walk_toward(vip.position, goal, VIP_SPEED_FACTOR),
        utterance=np.zeros(cfg.c_dim),
    )


def bystander_policy(
    state: WorldState,
    bystander_id: int,
    roles: RoleAssignment,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
) -> tuple[AgentAction, int]:
    """Walk at the current waypoint; on arrival pick a different landmark.

    Returns the action and the (possibly resampled) waypoint; the caller owns
    writing the waypoint back into the role assignment. With a single
    landmark there is nothing else to visit and the waypoint is kept.
    """
    if bystander_id not in roles.bystander_indices:
        raise ContractViolation(f"agent {bystander_id} is not a bystander")
    waypoint = roles.bystander_waypoints[bystander_id]
    position = state.agents[bystander_id].position
    target = state.landmarks[waypoint].position
    delta = target - position
    if float(np.sqrt(delta @ delta)) <= ARRIVAL_RADIUS and cfg.n_landmarks > 1:
        others = [j for j in range(cfg.n_landmarks) if j != waypoint]
        waypoint = others[int(rng.integers(len(others)))]
        target = state.landmarks[waypoint].position
    action = AgentAction(
        force=_walk_toward(position, target, BYSTANDER_SPEED_FACTOR),
        utterance=np.zeros(cfg.c_dim),
    )
    return action, waypoint


def scripted_agent_actions(
    state: WorldState,
    roles: RoleAssignment,
    cfg: ScenarioConfig,
    waypoint_rng: np.random.Generator,
) -> dict[int, AgentAction]:
    """Actions for the VIP and every bystander; updates waypoints in place."""
    actions = {roles.vip_index: vip_policy(state, roles, cfg)}
    for b in roles.bystander_indices:
        actions[b], roles.bystander_waypoints[b] = bystander_policy(
            state, b, roles, cfg, waypoint_rng
        )
    return actions


def episode_stream(seed: int, tag: int) -> np.random.Generator:
    """One of an episode's independent random streams (waypoints, controller)."""
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))


def run_episode(
    cfg: ScenarioConfig, bodyguard_controller: BodyguardController, seed: int
) -> EpisodeTrace:
    """Play exactly `cfg.horizon` steps and record everything.

    The given seed replaces `cfg.seed` for this episode, so one config can
    generate an unlimited family of reproducible episodes. Rewards are
    evaluated on the post-step state; a controller exception aborts with a
    `ControllerError` naming the failing step.
    """
    episode_cfg = replace(cfg, seed=seed)
    world, roles = build_scenario(episode_cfg)
    digest = scenario_digest(cfg)
    waypoint_rng = episode_stream(seed, _WAYPOINT_STREAM)
    controller_rng = episode_stream(seed, _CONTROLLER_STREAM)

    records = []
    for t in range(cfg.horizon):
        try:
            bodyguard_actions = list(bodyguard_controller(world, roles, t, controller_rng))
        except Exception as exc:
            raise ControllerError(
                f"bodyguard controller failed at step {t}: {exc}", step_index=t
            ) from exc
        if len(bodyguard_actions) != cfg.n_bodyguards:
            raise ContractViolation(
                f"controller returned {len(bodyguard_actions)} actions at step {t}, "
                f"expected {cfg.n_bodyguards}"
            )
        actions: list[AgentAction] = [None] * cfg.n_agents  # type: ignore[list-item]
        for idx, action in scripted_agent_actions(world, roles, cfg, waypoint_rng).items():
            actions[idx] = action
        for idx, action in zip(roles.bodyguard_indices, bodyguard_actions):
            actions[idx] = action

        world = step_world(world, actions, cfg.physics)
        rewards = [
            bodyguard_reward(world, g, actions[g], roles, cfg.threat).total
            for g in roles.bodyguard_indices
        ]
        records.append(
            StepRecord(
                state=world,
                actions=actions,
                rewards=rewards,
                threat=instantaneous_threat(world, roles, cfg.threat),
            )
        )
    return EpisodeTrace(records=records, seed=seed, config_digest=digest, roles=roles)
