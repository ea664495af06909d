"""Deterministic 2D particle world.

Discrete-time point-mass physics for a set of agents and fixed landmarks:
force integration with velocity damping, soft contact repulsion between
overlapping discs, a soft restoring force beyond the world boundary, and
per-agent observation vectors. All operations are pure functions of their
inputs; stepping the same state twice yields bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ConfigError, ContractViolation

if TYPE_CHECKING:
    from .scenario import ScenarioConfig

# Default entity geometry. Agents are small discs; landmarks slightly larger.
AGENT_RADIUS = 0.05
LANDMARK_RADIUS = 0.08
AGENT_MASS = 1.0
LANDMARK_MASS = 1.0

# Contact repulsion is cut to exactly zero once the gap between disc surfaces
# exceeds this many contact margins; the discarded tail is below 1e-17 of the
# contact force scale, and the cutoff keeps well-separated worlds at an exact
# fixed point under zero input.
_CONTACT_CUTOFF_MARGINS = 40.0

# Seed-stream tag for initial entity placement (see scenario module for the
# other per-episode streams).
_PLACEMENT_STREAM = 0


@dataclass(frozen=True)
class PhysicsConfig:
    """Integration constants. `max_speed=None` disables the speed clamp."""

    dt: float = 0.1
    damping: float = 0.25
    force_gain: float = 5.0
    max_speed: float | None = 1.3
    contact_force: float = 100.0
    contact_margin: float = 0.01
    world_half_extent: float = 1.5

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not 0 <= self.damping < 1:
            raise ConfigError(f"damping must lie in [0, 1), got {self.damping}")
        if self.force_gain <= 0:
            raise ConfigError(f"force_gain must be positive, got {self.force_gain}")
        if self.max_speed is not None and self.max_speed <= 0:
            raise ConfigError(f"max_speed must be positive or None, got {self.max_speed}")
        if self.contact_force <= 0:
            raise ConfigError(f"contact_force must be positive, got {self.contact_force}")
        if self.contact_margin <= 0:
            raise ConfigError(f"contact_margin must be positive, got {self.contact_margin}")
        if self.world_half_extent <= 0:
            raise ConfigError(
                f"world_half_extent must be positive, got {self.world_half_extent}"
            )


def _as_vec2(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (2,):
        raise ContractViolation(f"{name} must be a 2-vector, got shape {arr.shape}")
    return arr


@dataclass(eq=False)
class EntityState:
    """One disc in the world: kinematic state plus geometry."""

    position: np.ndarray
    velocity: np.ndarray
    radius: float = AGENT_RADIUS
    mass: float = AGENT_MASS
    movable: bool = True

    def __post_init__(self):
        self.position = _as_vec2(self.position, "position")
        self.velocity = _as_vec2(self.velocity, "velocity")
        if self.radius < 0:
            raise ContractViolation(f"radius must be nonnegative, got {self.radius}")
        if self.mass <= 0:
            raise ContractViolation(f"mass must be positive, got {self.mass}")

    def copy(self) -> "EntityState":
        return EntityState(
            position=self.position.copy(),
            velocity=self.velocity.copy(),
            radius=self.radius,
            mass=self.mass,
            movable=self.movable,
        )

    def __eq__(self, other):
        if not isinstance(other, EntityState):
            return NotImplemented
        return (
            np.array_equal(self.position, other.position)
            and np.array_equal(self.velocity, other.velocity)
            and self.radius == other.radius
            and self.mass == other.mass
            and self.movable == other.movable
        )


@dataclass(eq=False)
class WorldState:
    """Full simulation state: N agents, M landmarks, N utterances, step counter."""

    agents: list[EntityState]
    landmarks: list[EntityState]
    utterances: list[np.ndarray]
    step_index: int = 0

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_landmarks(self) -> int:
        return len(self.landmarks)

    @property
    def entities(self) -> list[EntityState]:
        """All entities, agents first then landmarks (the observation order)."""
        return self.agents + self.landmarks

    @property
    def c_dim(self) -> int:
        return len(self.utterances[0]) if self.utterances else 0

    def copy(self) -> "WorldState":
        return WorldState(
            agents=[a.copy() for a in self.agents],
            landmarks=[l.copy() for l in self.landmarks],
            utterances=[u.copy() for u in self.utterances],
            step_index=self.step_index,
        )

    def __eq__(self, other):
        if not isinstance(other, WorldState):
            return NotImplemented
        return (
            self.agents == other.agents
            and self.landmarks == other.landmarks
            and len(self.utterances) == len(other.utterances)
            and all(np.array_equal(a, b) for a, b in zip(self.utterances, other.utterances))
            and self.step_index == other.step_index
        )


@dataclass(eq=False)
class AgentAction:
    """A force command in [-1, 1]^2 plus an optional utterance vector.

    The force is clamped on construction so the bound holds structurally.
    """

    force: np.ndarray
    utterance: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.force = np.clip(_as_vec2(self.force, "force"), -1.0, 1.0)
        self.utterance = np.asarray(self.utterance, dtype=float).reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, AgentAction):
            return NotImplemented
        return np.array_equal(self.force, other.force) and np.array_equal(
            self.utterance, other.utterance
        )


def zero_action(c_dim: int = 0) -> AgentAction:
    return AgentAction(force=np.zeros(2), utterance=np.zeros(c_dim))


def observation_size(n_agents: int, n_landmarks: int, c_dim: int) -> int:
    """Length of every observation vector for a world of this shape."""
    return (n_agents + n_landmarks) * 4 + n_agents * c_dim


def reset_world(config: "ScenarioConfig", seed: int) -> WorldState:
    """Place all entities uniformly at random in the world square.

    Velocities and utterances start at zero. The placement stream is derived
    from the seed alone, so identical (config, seed) pairs give bit-identical
    worlds. Agent positions are drawn first (in index order), then landmarks.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, _PLACEMENT_STREAM]))
    half = config.physics.world_half_extent
    n, m = config.n_agents, config.n_landmarks
    positions = rng.uniform(-half, half, size=(n + m, 2))
    agents = [
        EntityState(
            position=positions[i],
            velocity=np.zeros(2),
            radius=AGENT_RADIUS,
            mass=AGENT_MASS,
            movable=True,
        )
        for i in range(n)
    ]
    landmarks = [
        EntityState(
            position=positions[n + j],
            velocity=np.zeros(2),
            radius=LANDMARK_RADIUS,
            mass=LANDMARK_MASS,
            movable=False,
        )
        for j in range(m)
    ]
    utterances = [np.zeros(config.c_dim) for _ in range(n)]
    return WorldState(agents=agents, landmarks=landmarks, utterances=utterances, step_index=0)


def contact_magnitude(dist, radius_sum, cfg: PhysicsConfig):
    """Soft-penetration repulsion magnitude for a pair at center distance `dist`.

    A softplus ramp of the overlap, scaled by the contact margin:
        contact_force * margin * softplus((radius_sum - dist) / margin)
    Exactly zero once the surface gap exceeds 40 margins. Accepts scalars or
    arrays (used by both the pairwise helper and the vectorized stepper).
    """
    gap = (radius_sum - dist) / cfg.contact_margin
    mag = cfg.contact_force * cfg.contact_margin * np.logaddexp(0.0, gap)
    return np.where(gap < -_CONTACT_CUTOFF_MARGINS, 0.0, mag)


def pairwise_contact_force(a: EntityState, b: EntityState, cfg: PhysicsConfig) -> np.ndarray:
    """Contact force exerted on `a` by `b`; swap the arguments for the negation.

    Coincident centers fall back to a fixed +x direction at the
    maximal-penetration magnitude so the result stays deterministic.
    """
    if a is b:
        raise ContractViolation("contact force requires two distinct entities")
    delta = a.position - b.position
    dist = float(np.sqrt(delta @ delta))
    radius_sum = a.radius + b.radius
    if dist == 0.0:
        return np.array([1.0, 0.0]) * float(contact_magnitude(0.0, radius_sum, cfg))
    return (delta / dist) * float(contact_magnitude(dist, radius_sum, cfg))


def _contact_forces(pos: np.ndarray, radius: np.ndarray, cfg: PhysicsConfig) -> np.ndarray:
    """Total contact force per entity, all pairs at once.

    Antisymmetry holds exactly: delta[i, j] = -delta[j, i] and the magnitude
    matrix is symmetric, so every pair obeys Newton's third law bit-for-bit.
    """
    count = len(pos)
    if count < 2:
        return np.zeros((count, 2))
    delta = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((delta**2).sum(axis=-1))
    radius_sum = radius[:, None] + radius[None, :]
    mag = contact_magnitude(dist, radius_sum, cfg)
    np.fill_diagonal(mag, 0.0)
    # Coincident centers: push along +x for the lower index, -x for the higher.
    coincident = (dist == 0.0) & (mag > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        direction = np.where(dist[..., None] > 0.0, delta / dist[..., None], 0.0)
    if coincident.any():
        idx = np.arange(count)
        sign = np.where(idx[:, None] < idx[None, :], 1.0, -1.0)
        direction[coincident, 0] = sign[coincident]
    return (direction * mag[..., None]).sum(axis=1)


def _boundary_force(pos: np.ndarray, cfg: PhysicsConfig) -> np.ndarray:
    """Per-component linear restoring force beyond the world half-extent.

    Exactly zero inside the boundary, so interior worlds keep their
    zero-input fixed point.
    """
    over = np.maximum(0.0, np.abs(pos) - cfg.world_half_extent)
    return -np.sign(pos) * cfg.contact_force * over


def step_world(
    state: WorldState, actions: Sequence[AgentAction], cfg: PhysicsConfig
) -> WorldState:
    """Advance the world one step; pure, the input state is left untouched.

    For each movable entity:
        v' = v * (1 - damping) + (force_gain * action + contacts + boundary) / mass * dt
        v' is rescaled to max_speed if it exceeds it, then x' = x + v' * dt.
    Landmarks never move. Utterances are replaced by the actions' vectors and
    the step counter increments by one.
    """
    n = state.n_agents
    if len(actions) != n:
        raise ContractViolation(f"expected {n} actions, got {len(actions)}")
    c_dim = state.c_dim
    for i, act in enumerate(actions):
        if len(act.utterance) != c_dim:
            raise ContractViolation(
                f"action {i} utterance has length {len(act.utterance)}, expected {c_dim}"
            )

    entities = state.entities
    pos = np.array([e.position for e in entities])
    vel = np.array([e.velocity for e in entities])
    radius = np.array([e.radius for e in entities])
    mass = np.array([e.mass for e in entities])
    movable = np.array([e.movable for e in entities])

    force = np.zeros_like(pos)
    for i, act in enumerate(actions):
        force[i] = cfg.force_gain * act.force
    force += _contact_forces(pos, radius, cfg)
    force += _boundary_force(pos, cfg)

    new_vel = vel * (1.0 - cfg.damping) + force / mass[:, None] * cfg.dt
    new_vel[~movable] = 0.0
    if cfg.max_speed is not None:
        speed = np.sqrt((new_vel**2).sum(axis=1))
        over = speed > cfg.max_speed
        if over.any():
            new_vel[over] *= (cfg.max_speed / speed[over])[:, None]
    new_pos = pos + new_vel * cfg.dt
    new_pos[~movable] = pos[~movable]

    def rebuild(i: int, src: EntityState) -> EntityState:
        return EntityState(
            position=new_pos[i],
            velocity=new_vel[i],
            radius=src.radius,
            mass=src.mass,
            movable=src.movable,
        )

    return WorldState(
        agents=[rebuild(i, e) for i, e in enumerate(state.agents)],
        landmarks=[rebuild(n + j, e) for j, e in enumerate(state.landmarks)],
        utterances=[act.utterance.copy() for act in actions],
        step_index=state.step_index + 1,
    )


def observe_stack(state: WorldState, agent_indices: Sequence[int]) -> np.ndarray:
    """Observation vectors for several agents as rows of one array.

    Row layout, per observing agent: for every entity (agents first, then
    landmarks) the block [dx, dy, vx, vy] where (dx, dy) is the entity's
    position relative to the observer; then every agent's utterance vector in
    agent order. The observer's own block therefore starts with (0, 0).
    """
    n = state.n_agents
    for i in agent_indices:
        if not 0 <= i < n:
            raise ContractViolation(f"agent index {i} out of range [0, {n})")
    entities = state.entities
    pos = np.array([e.position for e in entities])
    vel = np.array([e.velocity for e in entities])
    utter = np.concatenate(state.utterances) if state.c_dim else np.zeros(0)
    count = len(entities)
    width = observation_size(n, state.n_landmarks, state.c_dim)
    rows = np.empty((len(agent_indices), width))
    block = np.empty((count, 4))
    for row, i in enumerate(agent_indices):
        block[:, 0:2] = pos - pos[i]
        block[:, 2:4] = vel
        rows[row, : count * 4] = block.ravel()
        rows[row, count * 4 :] = utter
    return rows


def observe(state: WorldState, agent_index: int) -> np.ndarray:
    """Observation vector for one agent; see `observe_stack` for the layout."""
    return observe_stack(state, [agent_index])[0]
