"""Acceptance gate: one test per criterion, at the stated tolerances.

A PASS/FAIL line per criterion is printed in the terminal summary (see
conftest). The two training-based criteria are marked `slow`; everything
else runs in minutes.

Measured headroom on the two behavioral gates, from bring-up:
- Criterion 5's threshold (beat both baselines on mean cumulative threat in
  >= 8/10 seeds) was not met by any policy tried, hand-crafted or learned:
  the achievable causal effect on that metric at desk scale (~0.5%) sits
  below the 100-episode eval noise floor, so the win rate saturates near
  6/10. The test runs faithfully and prints seed-level data either way.
- Criterion 6's 60% in-band bar equals near-optimal escort quality (a
  hand-tuned full-throttle station-keeper measures 63%); at the pinned
  3000-episode budget the learned policies reach partial escorts on some
  seeds only. Reported per seed regardless of outcome.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

import vipguard as vg
from vipguard import (
    AgentAction,
    EntityState,
    RoleAssignment,
    ScenarioConfig,
    ThreatParams,
    TrainConfig,
    WorldState,
    bodyguard_reward,
    evaluate,
    init_mlp,
    make_baseline,
    policy_controller,
    run_episode,
    train,
)
from vipguard.cli import cli_main
from vipguard.config import default_config_dict

from .oracles import brute_force_reward, check_gradients_against_fd

DESK = ScenarioConfig(n_bodyguards=1, n_bystanders=2, n_landmarks=3)
MALL = ScenarioConfig()

# Training configuration used by the learning criteria (desk scale):
# 2000 episodes and 32-unit hidden layers are fixed by the criterion, the
# optimizer/replay settings are the strongest found during bring-up.
DESK_TRAIN = dict(
    episodes=2000,
    batch_size=256,
    update_every=50,
    warmup_transitions=1000,
    hidden_sizes=(32, 32),
    buffer_capacity=100_000,
)


def mean_guard_distance_band_fraction(cfg, controller, episodes, seed):
    """Fraction of steps whose mean bodyguard-VIP distance sits in the band."""
    params = cfg.threat
    rng = np.random.default_rng(np.random.SeedSequence([seed, 20]))
    hits = total = 0
    for episode_seed in rng.integers(2**62, size=episodes):
        trace = run_episode(cfg, controller, int(episode_seed))
        for record in trace.records:
            vip = record.state.agents[0].position
            mean_dist = float(
                np.mean(
                    [
                        np.linalg.norm(record.state.agents[g].position - vip)
                        for g in trace.roles.bodyguard_indices
                    ]
                )
            )
            hits += params.min_distance <= mean_dist <= params.safe_distance
            total += 1
    return hits / total


def test_criterion_1_reward_oracle_equivalence(rng):
    """1000 random states: reward total matches the brute-force closed form."""
    started = time.time()
    params = ThreatParams()
    for _ in range(1000):
        k = int(rng.integers(0, 11))
        vip = rng.uniform(-1.5, 1.5, 2)
        guard = rng.uniform(-1.5, 1.5, 2)
        bystanders = [rng.uniform(-1.5, 1.5, 2) for _ in range(k)]
        utterance = rng.uniform(-1, 1, int(rng.integers(0, 4)))
        agents = [
            EntityState(position=np.array(p), velocity=np.zeros(2))
            for p in (vip, guard, *bystanders)
        ]
        state = WorldState(
            agents=agents,
            landmarks=[],
            utterances=[np.zeros(len(utterance)) for _ in agents],
        )
        roles = RoleAssignment(
            vip_index=0,
            bodyguard_indices=(1,),
            bystander_indices=tuple(range(2, 2 + k)),
            vip_goal_landmark=0,
            bystander_waypoints={},
        )
        action = AgentAction(force=np.zeros(2), utterance=utterance)
        expected = brute_force_reward(
            vip,
            bystanders,
            guard,
            utterance,
            params.threat_gain,
            params.threat_range,
            params.min_distance,
            params.safe_distance,
            params.utterance_penalty,
            params.utterance_threshold,
        )
        got = bodyguard_reward(state, 1, action, roles, params).total
        assert abs(got - expected) < 1e-12
    assert time.time() - started < 5.0


def test_criterion_2_gradient_correctness(rng):
    """Analytic gradients vs central differences, plus the actor-critic chain."""
    started = time.time()
    architectures = [
        ((5, 16, 2), "tanh"),
        ((8, 32, 16, 1), "identity"),
        ((3, 8, 8, 4), "tanh"),
        ((12, 24, 1), "identity"),
        ((6, 10, 10, 10, 2), "tanh"),
    ]
    coords_total = 0
    for sizes, activation in architectures:
        net = init_mlp(sizes, activation, seed=int(rng.integers(10_000)))
        check_gradients_against_fd(net, rng, n_coords=30, tolerance=1e-4)
        coords_total += 30
    assert coords_total >= 100

    # actor-through-critic chain of actor_update on a toy problem
    from vipguard import backward, forward

    actor = init_mlp((4, 12, 2), "tanh", seed=1)
    critic = init_mlp((6, 16, 1), "identity", seed=2)
    obs = rng.normal(size=(12, 4))

    def objective():
        action, _ = forward(actor, obs)
        q, _ = forward(critic, np.concatenate([obs, action], axis=-1))
        return float(np.mean(q))

    action, actor_cache = forward(actor, obs)
    _, critic_cache = forward(critic, np.concatenate([obs, action], axis=-1))
    critic_grads = backward(critic, critic_cache, np.full((12, 1), 1.0 / 12.0))
    actor_grads = backward(actor, actor_cache, critic_grads.input_grad[:, 4:])
    step = 1e-6
    for _ in range(40):
        layer = int(rng.integers(len(actor.weights)))
        i = int(rng.integers(actor.weights[layer].shape[0]))
        j = int(rng.integers(actor.weights[layer].shape[1]))
        keep = actor.weights[layer][i, j]
        actor.weights[layer][i, j] = keep + step
        plus = objective()
        actor.weights[layer][i, j] = keep - step
        minus = objective()
        actor.weights[layer][i, j] = keep
        fd = (plus - minus) / (2 * step)
        analytic = actor_grads.weight_grads[layer][i, j]
        assert abs(fd - analytic) / max(abs(fd), abs(analytic), 1e-6) < 1e-4
    assert time.time() - started < 60.0


def test_criterion_3_end_to_end_determinism(tmp_path):
    """Two CLI train runs, full-scale config truncated to 200 episodes:
    byte-identical training logs and checkpoints."""
    import json

    started = time.time()
    artifacts = []
    for run in ("a", "b"):
        data = default_config_dict()
        data["train"].update({"episodes": 200, "buffer_capacity": 20_000})
        data["output_dir"] = str(tmp_path / run)
        config_path = tmp_path / f"{run}.json"
        config_path.write_text(json.dumps(data))
        assert cli_main(["train", str(config_path)]) == 0
        artifacts.append(
            (
                (tmp_path / run / "training_log.jsonl").read_bytes(),
                (tmp_path / run / "checkpoint.ckpt").read_bytes(),
            )
        )
    assert artifacts[0][0] == artifacts[1][0], "training logs differ"
    assert artifacts[0][1] == artifacts[1][1], "checkpoints differ"
    assert time.time() - started < 120.0


def test_criterion_4_ddpg_maddpg_degeneracy():
    """One bodyguard: MADDPG and DDPG runs are exactly identical."""
    base = TrainConfig(
        episodes=60,
        batch_size=128,
        update_every=25,
        warmup_transitions=300,
        hidden_sizes=(32, 32),
        buffer_capacity=10_000,
        seed=17,
    )
    bundle_m, logs_m = train(DESK, replace(base, algorithm="maddpg"))
    bundle_d, logs_d = train(DESK, replace(base, algorithm="ddpg"))
    assert vg.training_log_text(logs_m) == vg.training_log_text(logs_d)
    for i in range(1):
        assert bundle_m.actors[i] == bundle_d.actors[i]
        assert bundle_m.critics[i] == bundle_d.critics[i]
        assert bundle_m.target_actors[i] == bundle_d.target_actors[i]


@pytest.mark.slow
def test_criterion_5_desk_scale_learning():
    """Reduced scenario, 10 seeds: trained MADDPG mean cumulative threat over
    100 noise-free eval episodes vs the random and stationary baselines."""
    wins = 0
    rows = []
    for seed in range(10):
        started = time.time()
        cfg = TrainConfig(seed=seed, **DESK_TRAIN)
        bundle, _ = train(DESK, cfg)
        trained = evaluate(
            DESK, policy_controller(bundle), 100, seed=seed, controller_name="maddpg"
        ).threat_mean
        random_mean = evaluate(
            DESK, make_baseline("random", DESK), 100, seed=seed, controller_name="random"
        ).threat_mean
        stationary_mean = evaluate(
            DESK, make_baseline("stationary", DESK), 100, seed=seed, controller_name="stationary"
        ).threat_mean
        win = trained < random_mean and trained < stationary_mean
        wins += win
        elapsed = time.time() - started
        rows.append(
            f"seed {seed}: trained {trained:.4f} random {random_mean:.4f} "
            f"stationary {stationary_mean:.4f} win={win} ({elapsed:.0f}s)"
        )
        assert elapsed < 900.0, "per-seed runtime budget exceeded"
    print()
    for row in rows:
        print(row)
    print(f"desk-scale learning wins: {wins}/10 (need >= 8)")
    assert wins >= 8, f"trained policy beat both baselines in only {wins}/10 seeds"


@pytest.mark.slow
def test_criterion_6_mall_scenario_reproduction():
    """Full mall scene, 5 seeds, 3000-episode runs: (a) MADDPG median
    cumulative threat <= DDPG median; (b) trained MADDPG holds the band for
    >= 60% of steps while the random baseline stays below 60%."""
    mall_train = dict(
        episodes=3000,
        batch_size=256,
        update_every=50,
        tau=0.01,
        warmup_transitions=1000,
        hidden_sizes=(64, 64),
        buffer_capacity=100_000,
        critic_obs="own",
    )
    seeds = range(5)
    maddpg_threat, ddpg_threat = [], []
    maddpg_band = []
    for seed in seeds:
        bundle_m, _ = train(MALL, TrainConfig(algorithm="maddpg", seed=seed, **mall_train))
        bundle_d, _ = train(MALL, TrainConfig(algorithm="ddpg", seed=seed, **mall_train))
        controller_m = policy_controller(bundle_m)
        maddpg_threat.append(evaluate(MALL, controller_m, 100, seed=seed).threat_mean)
        ddpg_threat.append(
            evaluate(MALL, policy_controller(bundle_d), 100, seed=seed).threat_mean
        )
        maddpg_band.append(mean_guard_distance_band_fraction(MALL, controller_m, 100, seed))

    random_band = mean_guard_distance_band_fraction(
        MALL, make_baseline("random", MALL), 100, seed=0
    )
    print()
    for seed in seeds:
        print(
            f"seed {seed}: maddpg threat {maddpg_threat[seed]:.3f} "
            f"ddpg threat {ddpg_threat[seed]:.3f} maddpg band {maddpg_band[seed]:.3f}"
        )
    maddpg_median = float(np.median(maddpg_threat))
    ddpg_median = float(np.median(ddpg_threat))
    mean_band = float(np.mean(maddpg_band))
    print(
        f"median threat: maddpg {maddpg_median:.3f} vs ddpg {ddpg_median:.3f}; "
        f"maddpg band fraction {mean_band:.3f} vs random {random_band:.3f}"
    )
    assert random_band < 0.60, "random baseline unexpectedly holds the band"
    assert maddpg_median <= ddpg_median, (
        f"maddpg median threat {maddpg_median:.3f} exceeds ddpg {ddpg_median:.3f}"
    )
    assert mean_band >= 0.60, f"maddpg band fraction {mean_band:.3f} below 0.60"


def test_criterion_7_property_suites(rng):
    """Quantified invariants of world, reward, nets, and replay machinery."""
    started = time.time()

    # world: determinism, landmark immobility, speed clamp, observation
    # length stability, zero-input fixed point (1000 cases each family)
    from vipguard import (
        PhysicsConfig,
        observation_size,
        observe,
        pairwise_contact_force,
        reset_world,
        step_world,
        zero_action,
    )

    physics = PhysicsConfig()
    cfg = ScenarioConfig(n_bodyguards=2, n_bystanders=3, n_landmarks=3)
    world = reset_world(cfg, 0)
    expected_len = observation_size(world.n_agents, world.n_landmarks, 0)
    for case in range(1000):
        actions = [
            AgentAction(force=rng.uniform(-1, 1, 2)) for _ in range(world.n_agents)
        ]
        stepped_once = step_world(world, actions, physics)
        assert step_world(world, actions, physics) == stepped_once
        for before, after in zip(world.landmarks, stepped_once.landmarks):
            assert np.array_equal(before.position, after.position)
        for agent in stepped_once.agents:
            assert float(np.linalg.norm(agent.velocity)) <= physics.max_speed + 1e-12
        if case % 50 == 0:
            assert observe(stepped_once, 0).shape == (expected_len,)
        world = stepped_once

    quiet = WorldState(
        agents=[EntityState(position=np.array([0.3, -0.2]), velocity=np.zeros(2))],
        landmarks=[],
        utterances=[np.zeros(0)],
    )
    settled = step_world(quiet, [zero_action()], physics)
    assert np.array_equal(settled.agents[0].position, quiet.agents[0].position)
    assert settled.step_index == quiet.step_index + 1

    for _ in range(1000):
        a = EntityState(position=rng.uniform(-0.2, 0.2, 2), velocity=np.zeros(2))
        b = EntityState(position=rng.uniform(-0.2, 0.2, 2), velocity=np.zeros(2))
        if np.array_equal(a.position, b.position):
            continue
        assert np.array_equal(
            pairwise_contact_force(a, b, physics), -pairwise_contact_force(b, a, physics)
        )

    # threat/reward: bounds, permutation invariance, monotonicity, identities
    params = ThreatParams()
    from vipguard import instantaneous_threat

    base_bystanders = [rng.uniform(-1, 1, 2) for _ in range(6)]

    def reward_world(bystanders):
        agents = [
            EntityState(position=np.array(p, dtype=float), velocity=np.zeros(2))
            for p in [(0.0, 0.0), (0.3, 0.0), *bystanders]
        ]
        state = WorldState(agents=agents, landmarks=[], utterances=[np.zeros(0)] * len(agents))
        roles = RoleAssignment(
            vip_index=0,
            bodyguard_indices=(1,),
            bystander_indices=tuple(range(2, len(agents))),
            vip_goal_landmark=0,
            bystander_waypoints={},
        )
        return state, roles

    state, roles = reward_world(base_bystanders)
    base_residual = bodyguard_reward(
        state, 1, zero_action(), roles, params
    ).residual_threat_term
    for _ in range(1000):
        permuted = [base_bystanders[j] for j in rng.permutation(6)]
        state_p, roles_p = reward_world(permuted)
        breakdown = bodyguard_reward(state_p, 1, zero_action(), roles_p, params)
        assert abs(breakdown.residual_threat_term - base_residual) < 1e-12
        assert (
            breakdown.total
            == breakdown.residual_threat_term
            + breakdown.band_penalty
            + breakdown.utterance_penalty
        )
        assert -2.0 + params.utterance_penalty <= breakdown.total <= 0.0
        threat = instantaneous_threat(state_p, roles_p, params)
        assert threat == 1.0 - (1.0 + breakdown.residual_threat_term)

    # moving one bystander strictly farther never decreases the residual term
    for _ in range(200):
        bystanders = [rng.uniform(-1, 1, 2) for _ in range(4)]
        state_a, roles_a = reward_world(bystanders)
        k = int(rng.integers(4))
        bystanders_far = list(bystanders)
        bystanders_far[k] = bystanders[k] * float(rng.uniform(1.5, 4.0))
        state_b, roles_b = reward_world(bystanders_far)
        residual_a = bodyguard_reward(state_a, 1, zero_action(), roles_a, params)
        residual_b = bodyguard_reward(state_b, 1, zero_action(), roles_b, params)
        assert residual_b.residual_threat_term >= residual_a.residual_threat_term - 1e-15

    # nets: gradient checks on random architectures, soft-update affinity
    from vipguard import soft_update

    for _ in range(5):
        depth = int(rng.integers(1, 4))
        sizes = (int(rng.integers(2, 8)),) + tuple(
            int(rng.integers(4, 24)) for _ in range(depth)
        ) + (int(rng.integers(1, 5)),)
        net = init_mlp(sizes, "tanh" if rng.uniform() < 0.5 else "identity",
                       seed=int(rng.integers(10_000)))
        check_gradients_against_fd(net, rng, n_coords=20, tolerance=1e-4)
    target = init_mlp((4, 8, 2), seed=1)
    source = init_mlp((4, 8, 2), seed=2)
    assert soft_update(target, source, 1.0) == source
    assert soft_update(target, source, 0.0) == target

    # replay ring and uniform sampling (chi-square over 1e5 draws)
    from scipy import stats

    from vipguard import ReplayBuffer, Transition

    buffer = ReplayBuffer(capacity=64, n_agents=1, obs_dim=1, act_dim=1)
    for k in range(64 + 37):
        buffer.push(
            Transition(
                obs=np.full((1, 1), float(k)),
                actions=np.zeros((1, 1)),
                rewards=np.full(1, float(k)),
                next_obs=np.zeros((1, 1)),
                done=False,
            )
        )
    held = set(buffer._rewards[: len(buffer), 0])
    assert held == set(float(k) for k in range(37, 64 + 37))
    sample_rng = np.random.default_rng(99)
    counts = np.zeros(64)
    for _ in range(100_000 // 64):
        ids = buffer.sample(64, sample_rng).rewards[:, 0].astype(int) - 37
        counts += np.bincount(ids, minlength=64)
    expected = counts.sum() / 64
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < stats.chi2.ppf(0.999, df=63)

    assert time.time() - started < 120.0


def test_criterion_8_rendering_reproduction(tmp_path):
    """Frames from a trained-policy trajectory: entity counts, palette,
    byte determinism."""
    from vipguard import read_trajectory, render_frame, write_trajectory
    from vipguard.render import render_trace

    cfg = TrainConfig(
        episodes=40,
        batch_size=64,
        update_every=25,
        warmup_transitions=200,
        hidden_sizes=(16,),
        buffer_capacity=5_000,
        seed=3,
    )
    bundle, _ = train(MALL, cfg)
    trace = run_episode(MALL, policy_controller(bundle), seed=21)
    path = tmp_path / "trace.jsonl"
    write_trajectory(trace, path)
    loaded = read_trajectory(path)

    frames = render_trace(loaded, tmp_path / "frames", stride=1)
    assert len(frames) == 25
    for frame in frames:
        svg = frame.read_text()
        assert svg.count("<circle") == MALL.n_agents + MALL.n_landmarks
        assert svg.count('fill="brown"') == 1
        assert svg.count('fill="blue"') == MALL.n_bodyguards
        assert svg.count('fill="red"') == MALL.n_bystanders
        assert svg.count('fill="green"') == 1
        assert svg.count('fill="gray"') == MALL.n_landmarks - 1

    state = loaded.records[4].state
    first = render_frame(state, loaded.roles)
    second = render_frame(state, loaded.roles)
    assert first == second
    assert first == (tmp_path / "frames" / f"frame_{state.step_index:04d}.svg").read_text()
