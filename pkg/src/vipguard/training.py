"""DDPG and MADDPG training for the bodyguard team.

Only bodyguards learn; the VIP and bystanders are part of the environment.
Each bodyguard owns an actor (observation -> bounded action) and a critic.
Under MADDPG the critic is centralized: it scores the agent's value from
every bodyguard's observation and action, which keeps the learning problem
stationary while the other policies move. Under DDPG the critic sees only
the agent's own observation and action. With a single bodyguard the two
constructions coincide exactly.

Training is bit-deterministic per (configs, seed): every random stream
(network init, episode seeds, exploration noise, minibatch sampling) is
derived from the training seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ConfigError, ContractViolation, TrainingDivergence
from .nets import (
    MlpParams,
    OptState,
    backward,
    clip_grad_norm,
    forward,
    init_mlp,
    init_opt_state,
    opt_step,
    soft_update,
)
from .rewards import bodyguard_reward, instantaneous_threat
from .scenario import (
    ScenarioConfig,
    _WAYPOINT_STREAM,
    build_scenario,
    episode_stream,
    scenario_digest,
    scripted_agent_actions,
)
from .world import AgentAction, observation_size, observe_stack, step_world

_ALGORITHMS = ("maddpg", "ddpg")
_CRITIC_OBS = ("all", "own")

# Seed-stream tags for training (0..3 are the per-episode streams).
_INIT_STREAM = 10
_EPISODE_STREAM = 11
_NOISE_STREAM = 12
_SAMPLE_STREAM = 13


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; the defaults are the full-scale regime."""

    episodes: int = 10_000
    steps_per_episode: int = 25
    batch_size: int = 1024
    gamma: float = 0.95
    tau: float = 0.01
    noise_start: float = 0.3
    noise_end: float = 0.05
    noise_anneal_fraction: float = 0.6
    update_every: int = 100
    warmup_transitions: int | None = None  # None: use batch_size
    algorithm: str = "maddpg"
    critic_obs: str = "all"  # centralized critic sees all observations or only its own
    team_average_reward: bool = False
    share_weights: bool = False
    hidden_sizes: tuple[int, ...] = (64, 64)
    actor_lr: float = 1e-2
    critic_lr: float = 1e-2
    grad_clip: float = 0.5
    buffer_capacity: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.episodes < 0:
            raise ConfigError(f"episodes must be nonnegative, got {self.episodes}")
        if self.steps_per_episode < 1:
            raise ConfigError(f"steps_per_episode must be positive, got {self.steps_per_episode}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}")
        if not 0 <= self.gamma < 1:
            raise ConfigError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0 < self.tau <= 1:
            raise ConfigError(f"tau must lie in (0, 1], got {self.tau}")
        if self.noise_start < 0 or self.noise_end < 0:
            raise ConfigError("noise scales must be nonnegative")
        if not 0 <= self.noise_anneal_fraction <= 1:
            raise ConfigError(
                f"noise_anneal_fraction must lie in [0, 1], got {self.noise_anneal_fraction}"
            )
        if self.update_every < 1:
            raise ConfigError(f"update_every must be positive, got {self.update_every}")
        if self.algorithm not in _ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {_ALGORITHMS}, got {self.algorithm!r}")
        if self.critic_obs not in _CRITIC_OBS:
            raise ConfigError(f"critic_obs must be one of {_CRITIC_OBS}, got {self.critic_obs!r}")
        if len(self.hidden_sizes) < 1 or any(h < 1 for h in self.hidden_sizes):
            raise ConfigError(f"hidden_sizes must be positive, got {self.hidden_sizes}")
        if self.buffer_capacity < self.batch_size:
            raise ConfigError("buffer_capacity must be at least batch_size")
        if self.grad_clip <= 0:
            raise ConfigError(f"grad_clip must be positive, got {self.grad_clip}")


@dataclass(eq=False)
class Transition:
    """One environment step for all bodyguards; rows are agent-indexed."""

    obs: np.ndarray  # (n_bodyguards, obs_dim)
    actions: np.ndarray  # (n_bodyguards, act_dim), force then utterance
    rewards: np.ndarray  # (n_bodyguards,)
    next_obs: np.ndarray  # (n_bodyguards, obs_dim)
    done: bool


@dataclass(eq=False)
class Batch:
    """A sampled minibatch; leading axis is the batch dimension."""

    obs: np.ndarray  # (B, n, obs_dim)
    actions: np.ndarray  # (B, n, act_dim)
    rewards: np.ndarray  # (B, n)
    next_obs: np.ndarray  # (B, n, obs_dim)
    dones: np.ndarray  # (B,)


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform sampling."""

    def __init__(self, capacity: int, n_agents: int, obs_dim: int, act_dim: int):
        if capacity < 1:
            raise ConfigError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._obs = np.empty((capacity, n_agents, obs_dim))
        self._actions = np.empty((capacity, n_agents, act_dim))
        self._rewards = np.empty((capacity, n_agents))
        self._next_obs = np.empty((capacity, n_agents, obs_dim))
        self._dones = np.empty(capacity)
        self._insertions = 0

    def __len__(self) -> int:
        return min(self._insertions, self.capacity)

    @property
    def insertions(self) -> int:
        return self._insertions

    def push(self, transition: Transition) -> None:
        if transition.obs.shape != self._obs.shape[1:]:
            raise ContractViolation(
                f"observation block {transition.obs.shape} does not fit buffer "
                f"{self._obs.shape[1:]}"
            )
        if transition.actions.shape != self._actions.shape[1:]:
            raise ContractViolation("action block does not fit buffer")
        slot = self._insertions % self.capacity
        self._obs[slot] = transition.obs
        self._actions[slot] = transition.actions
        self._rewards[slot] = transition.rewards
        self._next_obs[slot] = transition.next_obs
        self._dones[slot] = float(transition.done)
        self._insertions += 1

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        size = len(self)
        if batch_size > size:
            raise ContractViolation(f"cannot sample {batch_size} from buffer of size {size}")
        idx = rng.integers(size, size=batch_size)
        return Batch(
            obs=self._obs[idx],
            actions=self._actions[idx],
            rewards=self._rewards[idx],
            next_obs=self._next_obs[idx],
            dones=self._dones[idx],
        )


@dataclass(eq=False)
class LearnerBundle:
    """Per-bodyguard networks, their targets, optimizer states, and metadata."""

    actors: list[MlpParams]
    critics: list[MlpParams]
    target_actors: list[MlpParams]
    target_critics: list[MlpParams]
    actor_opt: list[OptState]
    critic_opt: list[OptState]
    algorithm: str = "maddpg"
    critic_obs: str = "all"
    noise_scale: float = 0.0
    scenario_digest: str = ""

    @property
    def n_bodyguards(self) -> int:
        return len(self.actors)


def action_dim(cfg: ScenarioConfig) -> int:
    """Force command plus utterance channel."""
    return 2 + cfg.c_dim


def obs_dim(cfg: ScenarioConfig) -> int:
    return observation_size(cfg.n_agents, cfg.n_landmarks, cfg.c_dim)


def critic_input_dim(
    algorithm: str, critic_obs: str, n_bodyguards: int, obs_size: int, act_size: int
) -> int:
    if algorithm == "ddpg":
        return obs_size + act_size
    obs_part = n_bodyguards * obs_size if critic_obs == "all" else obs_size
    return obs_part + n_bodyguards * act_size


def _action_slot(
    algorithm: str, critic_obs: str, agent_index: int, n_bodyguards: int, obs_size: int, act_size: int
) -> int:
    """Offset of the agent's own action inside its critic input vector."""
    if algorithm == "ddpg":
        return obs_size
    obs_part = n_bodyguards * obs_size if critic_obs == "all" else obs_size
    return obs_part + agent_index * act_size


def critic_input(
    algorithm: str,
    agent_index: int,
    observations: Sequence[np.ndarray],
    actions: Sequence[np.ndarray],
    critic_obs: str = "all",
) -> np.ndarray:
    """Assemble the critic's input vector (batched inputs concatenate rowwise).

    MADDPG concatenates every bodyguard's action (and, with
    critic_obs="all", every observation) in agent order; DDPG uses only the
    agent's own observation and action.
    """
    if algorithm not in _ALGORITHMS:
        raise ContractViolation(f"unknown algorithm {algorithm!r}")
    if len(observations) != len(actions):
        raise ContractViolation(
            f"got {len(observations)} observations but {len(actions)} actions"
        )
    if not 0 <= agent_index < len(observations):
        raise ContractViolation(f"agent index {agent_index} out of range")
    if algorithm == "ddpg":
        parts = [observations[agent_index], actions[agent_index]]
    elif critic_obs == "all":
        parts = list(observations) + list(actions)
    else:
        parts = [observations[agent_index]] + list(actions)
    return np.concatenate(parts, axis=-1)


def select_action(
    actor: MlpParams, observation, noise_scale: float, rng: np.random.Generator
) -> AgentAction:
    """Actor output plus Gaussian exploration noise, clamped to [-1, 1].

    noise_scale=0 draws nothing from the generator, so evaluation is fully
    deterministic. The first two output components are the force command;
    any remaining components form the utterance.
    """
    if noise_scale < 0:
        raise ContractViolation(f"noise_scale must be nonnegative, got {noise_scale}")
    out, _ = forward(actor, observation)
    if noise_scale > 0:
        out = out + rng.normal(0.0, noise_scale, size=out.shape)
    out = np.clip(out, -1.0, 1.0)
    return AgentAction(force=out[:2], utterance=out[2:])


def init_learner(scenario_cfg: ScenarioConfig, train_cfg: TrainConfig) -> LearnerBundle:
    """Fresh networks for every bodyguard, deterministically seeded."""
    n = scenario_cfg.n_bodyguards
    o_dim = obs_dim(scenario_cfg)
    a_dim = action_dim(scenario_cfg)
    c_dim = critic_input_dim(train_cfg.algorithm, train_cfg.critic_obs, n, o_dim, a_dim)
    seed_rng = np.random.default_rng(np.random.SeedSequence([train_cfg.seed, _INIT_STREAM]))
    net_seeds = seed_rng.integers(2**62, size=(n, 2))

    actors, critics, t_actors, t_critics, a_opts, c_opts = [], [], [], [], [], []
    for i in range(n):
        source = 0 if train_cfg.share_weights else i
        actor = init_mlp(
            (o_dim, *train_cfg.hidden_sizes, a_dim), "tanh", seed=int(net_seeds[source, 0])
        )
        critic = init_mlp(
            (c_dim, *train_cfg.hidden_sizes, 1), "identity", seed=int(net_seeds[source, 1])
        )
        actors.append(actor)
        critics.append(critic)
        t_actors.append(actor.copy())
        t_critics.append(critic.copy())
        a_opts.append(init_opt_state(actor, learning_rate=train_cfg.actor_lr))
        c_opts.append(init_opt_state(critic, learning_rate=train_cfg.critic_lr))
    return LearnerBundle(
        actors=actors,
        critics=critics,
        target_actors=t_actors,
        target_critics=t_critics,
        actor_opt=a_opts,
        critic_opt=c_opts,
        algorithm=train_cfg.algorithm,
        critic_obs=train_cfg.critic_obs,
        noise_scale=train_cfg.noise_start,
        scenario_digest=scenario_digest(scenario_cfg),
    )


def critic_update(bundle: LearnerBundle, batch: Batch, agent_index: int, cfg: TrainConfig) -> float:
    """One squared-error step toward the bootstrap target; returns the pre-update loss."""
    i = agent_index
    n = bundle.n_bodyguards
    size = len(batch.dones)

    if cfg.algorithm == "maddpg":
        next_actions = [forward(bundle.target_actors[j], batch.next_obs[:, j])[0] for j in range(n)]
        next_input = critic_input(
            "maddpg", i, [batch.next_obs[:, j] for j in range(n)], next_actions, cfg.critic_obs
        )
    else:
        next_action = forward(bundle.target_actors[i], batch.next_obs[:, i])[0]
        next_input = np.concatenate([batch.next_obs[:, i], next_action], axis=-1)
    q_next = forward(bundle.target_critics[i], next_input)[0][:, 0]
    target = batch.rewards[:, i] + cfg.gamma * (1.0 - batch.dones) * q_next

    current_input = critic_input(
        cfg.algorithm,
        i,
        [batch.obs[:, j] for j in range(n)],
        [batch.actions[:, j] for j in range(n)],
        cfg.critic_obs,
    )
    q, cache = forward(bundle.critics[i], current_input)
    error = q[:, 0] - target
    loss = float(np.mean(error**2))
    grads = backward(bundle.critics[i], cache, (2.0 / size) * error[:, None])
    grads = clip_grad_norm(grads, cfg.grad_clip)
    bundle.critics[i], bundle.critic_opt[i] = opt_step(
        bundle.critics[i], grads, bundle.critic_opt[i]
    )
    return loss


def actor_update(bundle: LearnerBundle, batch: Batch, agent_index: int, cfg: TrainConfig) -> float:
    """Ascend the critic through the agent's own action slot; returns mean Q."""
    i = agent_index
    n = bundle.n_bodyguards
    size = len(batch.dones)
    o_size = batch.obs.shape[-1]
    a_size = batch.actions.shape[-1]

    action, actor_cache = forward(bundle.actors[i], batch.obs[:, i])
    actions = [batch.actions[:, j] for j in range(n)]
    actions[i] = action
    current_input = critic_input(
        cfg.algorithm, i, [batch.obs[:, j] for j in range(n)], actions, cfg.critic_obs
    )
    q, critic_cache = forward(bundle.critics[i], current_input)
    objective = float(np.mean(q))

    critic_grads = backward(bundle.critics[i], critic_cache, np.full((size, 1), 1.0 / size))
    slot = _action_slot(cfg.algorithm, cfg.critic_obs, i, n, o_size, a_size)
    dq_daction = critic_grads.input_grad[:, slot : slot + a_size]
    grads = backward(bundle.actors[i], actor_cache, -dq_daction)  # minimize -Q
    grads = clip_grad_norm(grads, cfg.grad_clip)
    bundle.actors[i], bundle.actor_opt[i] = opt_step(bundle.actors[i], grads, bundle.actor_opt[i])
    return objective


def _share_slot(bundle: LearnerBundle, i: int) -> None:
    """Propagate agent i's networks to every slot (weight-sharing ablation)."""
    n = bundle.n_bodyguards
    bundle.actors = [bundle.actors[i]] * n
    bundle.critics = [bundle.critics[i]] * n
    bundle.target_actors = [bundle.target_actors[i]] * n
    bundle.target_critics = [bundle.target_critics[i]] * n
    bundle.actor_opt = [bundle.actor_opt[i]] * n
    bundle.critic_opt = [bundle.critic_opt[i]] * n


def _noise_scale(cfg: TrainConfig, episode: int) -> float:
    """Linear anneal from noise_start to noise_end over the first anneal span."""
    span = cfg.noise_anneal_fraction * cfg.episodes
    if span <= 0:
        return cfg.noise_end
    frac = episode / span
    if frac >= 1.0:
        return cfg.noise_end
    return cfg.noise_start + (cfg.noise_end - cfg.noise_start) * frac


@dataclass(frozen=True)
class EpisodeLog:
    """One training-log record; losses are None before the first update."""

    episode: int
    mean_return: float
    cumulative_threat: float
    critic_loss: float | None
    actor_objective: float | None
    noise_scale: float

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "episode": self.episode,
                "mean_return": self.mean_return,
                "cumulative_threat": self.cumulative_threat,
                "critic_loss": self.critic_loss,
                "actor_objective": self.actor_objective,
                "noise_scale": self.noise_scale,
            }
        )


def training_log_text(logs: Sequence[EpisodeLog]) -> str:
    """The training log as line-delimited JSON (one record per episode)."""
    return "".join(log.to_json_line() + "\n" for log in logs)


def train(
    scenario_cfg: ScenarioConfig,
    train_cfg: TrainConfig,
    progress: "callable | None" = None,
) -> tuple[LearnerBundle, list[EpisodeLog]]:
    """Run the full training loop; bit-deterministic per (configs, seed).

    Every `update_every` environment steps (after the warmup fill) each
    bodyguard gets one critic and one actor update on its own uniform
    minibatch, followed by soft target updates. `progress`, if given, is
    called with each EpisodeLog as it is produced.
    """
    bundle = init_learner(scenario_cfg, train_cfg)
    n = scenario_cfg.n_bodyguards
    buffer = ReplayBuffer(
        train_cfg.buffer_capacity, n, obs_dim(scenario_cfg), action_dim(scenario_cfg)
    )
    episode_seed_rng = np.random.default_rng(
        np.random.SeedSequence([train_cfg.seed, _EPISODE_STREAM])
    )
    noise_rng = np.random.default_rng(np.random.SeedSequence([train_cfg.seed, _NOISE_STREAM]))
    sample_rng = np.random.default_rng(np.random.SeedSequence([train_cfg.seed, _SAMPLE_STREAM]))
    warmup = max(train_cfg.batch_size, train_cfg.warmup_transitions or 0)

    logs: list[EpisodeLog] = []
    total_steps = 0
    for episode in range(train_cfg.episodes):
        noise = _noise_scale(train_cfg, episode)
        bundle.noise_scale = noise
        episode_seed = int(episode_seed_rng.integers(2**62))
        world, roles = build_scenario(replace(scenario_cfg, seed=episode_seed))
        waypoint_rng = episode_stream(episode_seed, _WAYPOINT_STREAM)
        guards = roles.bodyguard_indices
        obs = observe_stack(world, guards)

        returns = np.zeros(n)
        threat_total = 0.0
        critic_losses: list[float] = []
        actor_objectives: list[float] = []
        for t in range(train_cfg.steps_per_episode):
            guard_actions = [
                select_action(bundle.actors[i], obs[i], noise, noise_rng) for i in range(n)
            ]
            actions: list[AgentAction] = [None] * scenario_cfg.n_agents  # type: ignore[list-item]
            for idx, action in scripted_agent_actions(world, roles, scenario_cfg, waypoint_rng).items():
                actions[idx] = action
            for idx, action in zip(guards, guard_actions):
                actions[idx] = action

            world = step_world(world, actions, scenario_cfg.physics)
            next_obs = observe_stack(world, guards)
            rewards = np.array(
                [
                    bodyguard_reward(world, g, actions[g], roles, scenario_cfg.threat).total
                    for g in guards
                ]
            )
            if train_cfg.team_average_reward:
                rewards = np.full(n, rewards.mean())
            done = t == train_cfg.steps_per_episode - 1
            buffer.push(
                Transition(
                    obs=obs,
                    actions=np.stack(
                        [np.concatenate([a.force, a.utterance]) for a in guard_actions]
                    ),
                    rewards=rewards,
                    next_obs=next_obs,
                    done=done,
                )
            )
            returns += rewards
            threat_total += instantaneous_threat(world, roles, scenario_cfg.threat)
            obs = next_obs
            total_steps += 1

            if len(buffer) >= warmup and total_steps % train_cfg.update_every == 0:
                for i in range(n):
                    agent_batch = buffer.sample(train_cfg.batch_size, sample_rng)
                    closs = critic_update(bundle, agent_batch, i, train_cfg)
                    aobj = actor_update(bundle, agent_batch, i, train_cfg)
                    if not (np.isfinite(closs) and np.isfinite(aobj)):
                        raise TrainingDivergence(
                            f"non-finite loss at episode {episode}, step {t}, agent {i}: "
                            f"critic={closs}, actor={aobj}"
                        )
                    critic_losses.append(closs)
                    actor_objectives.append(aobj)
                    if train_cfg.share_weights:
                        _share_slot(bundle, i)
                for i in range(n):
                    bundle.target_actors[i] = soft_update(
                        bundle.target_actors[i], bundle.actors[i], train_cfg.tau
                    )
                    bundle.target_critics[i] = soft_update(
                        bundle.target_critics[i], bundle.critics[i], train_cfg.tau
                    )
                if train_cfg.share_weights:
                    _share_slot(bundle, n - 1)

        log = EpisodeLog(
            episode=episode,
            mean_return=float(returns.mean()),
            cumulative_threat=threat_total,
            critic_loss=float(np.mean(critic_losses)) if critic_losses else None,
            actor_objective=float(np.mean(actor_objectives)) if actor_objectives else None,
            noise_scale=noise,
        )
        logs.append(log)
        if progress is not None:
            progress(log)
    return bundle, logs
