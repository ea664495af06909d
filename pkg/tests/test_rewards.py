"""Threat metric and reward: frozen examples, oracle equivalence, properties."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vipguard import (
    AgentAction,
    ConfigError,
    ContractViolation,
    EntityState,
    RoleAssignment,
    ThreatParams,
    WorldState,
    bodyguard_reward,
    cumulative_threat,
    distance_band_penalty,
    instantaneous_threat,
    threat_level,
)
from vipguard.scenario import EpisodeTrace, StepRecord

from .oracles import brute_force_reward


def guard_world(vip_pos, guard_pos, bystander_positions, utterance=()):
    """VIP at index 0, one bodyguard at index 1, bystanders after."""
    positions = [vip_pos, guard_pos, *bystander_positions]
    agents = [
        EntityState(position=np.array(p, dtype=float), velocity=np.zeros(2)) for p in positions
    ]
    c_dim = len(utterance)
    state = WorldState(
        agents=agents,
        landmarks=[],
        utterances=[np.zeros(c_dim) for _ in agents],
        step_index=0,
    )
    roles = RoleAssignment(
        vip_index=0,
        bodyguard_indices=(1,),
        bystander_indices=tuple(range(2, len(agents))),
        vip_goal_landmark=0,
        bystander_waypoints={},
    )
    action = AgentAction(force=np.zeros(2), utterance=np.array(utterance, dtype=float))
    return state, roles, action


class TestThreatLevel:
    def test_zero_distance_is_one(self):
        for params in (ThreatParams(), ThreatParams(threat_gain=3.0, threat_range=0.1)):
            assert threat_level(0.0, params) == 1.0

    def test_unit_case_frozen(self):
        params = ThreatParams(threat_gain=1.0, threat_range=1.0)
        assert abs(threat_level(1.0, params) - 0.36787944117144233) < 1e-16

    def test_exponent_identity(self):
        a = threat_level(2.0, ThreatParams(threat_gain=2.0, threat_range=4.0))
        b = threat_level(1.0, ThreatParams(threat_gain=1.0, threat_range=1.0))
        assert a == b

    def test_negative_distance_rejected(self):
        with pytest.raises(ContractViolation):
            threat_level(-1e-9, ThreatParams())

    @given(d1=st.floats(0, 5), d2=st.floats(0, 5))
    @settings(max_examples=200, deadline=None)
    def test_monotone_decreasing(self, d1, d2):
        # strictly decreasing in the reals; adjacent doubles can tie after
        # rounding, so strictness is only asserted across a resolvable gap
        params = ThreatParams()
        if d1 < d2:
            assert threat_level(d1, params) >= threat_level(d2, params)
            if d2 - d1 > 1e-9:
                assert threat_level(d1, params) > threat_level(d2, params)
        elif d1 == d2:
            assert threat_level(d1, params) == threat_level(d2, params)


class TestDistanceBand:
    def test_boundaries_inclusive(self):
        params = ThreatParams()
        vip = np.zeros(2)
        assert distance_band_penalty([params.min_distance, 0.0], vip, params) == 0.0
        assert distance_band_penalty([params.safe_distance, 0.0], vip, params) == 0.0

    def test_below_band(self):
        assert distance_band_penalty([0.0, 0.0], [0.0, 0.0], ThreatParams()) == -1.0

    def test_just_above_band(self):
        params = ThreatParams()
        assert distance_band_penalty([params.safe_distance + 1e-9, 0.0], [0, 0], params) == -1.0


class TestBodyguardReward:
    def test_no_bystanders_in_band_is_zero(self):
        state, roles, action = guard_world((0, 0), (0.3, 0), [])
        breakdown = bodyguard_reward(state, 1, action, roles, ThreatParams())
        assert breakdown.total == 0.0
        assert breakdown.residual_threat_term == 0.0  # empty product

    def test_bystander_on_vip_forces_minus_one(self):
        state, roles, action = guard_world((0, 0), (0.3, 0), [(0, 0)])
        breakdown = bodyguard_reward(state, 1, action, roles, ThreatParams())
        assert breakdown.total == -1.0
        assert breakdown.residual_threat_term == -1.0

    def test_two_half_threat_bystanders_outside_band(self):
        # distance giving TL = 0.5 exactly: d = range * ln 2 / gain
        params = ThreatParams()
        d = params.threat_range * math.log(2.0) / params.threat_gain
        state, roles, action = guard_world((0, 0), (1.4, 0), [(d, 0), (-d, 0)])
        breakdown = bodyguard_reward(state, 1, action, roles, params)
        assert abs(breakdown.total - (-1.0 + 0.25 - 1.0)) < 1e-12

    def test_utterance_penalty_applied(self):
        params = ThreatParams()
        state, roles, action = guard_world((0, 0), (0.3, 0), [], utterance=(0.5,))
        breakdown = bodyguard_reward(state, 1, action, roles, params)
        assert breakdown.utterance_penalty == params.utterance_penalty
        silent = AgentAction(force=np.zeros(2), utterance=np.array([1e-9]))
        assert bodyguard_reward(state, 1, silent, roles, params).utterance_penalty == 0.0

    def test_non_bodyguard_rejected(self):
        state, roles, action = guard_world((0, 0), (0.3, 0), [(1, 1)])
        with pytest.raises(ContractViolation):
            bodyguard_reward(state, 0, action, roles, ThreatParams())

    def test_matches_brute_force_oracle(self, rng):
        params = ThreatParams()
        for _ in range(200):
            k = int(rng.integers(0, 6))
            vip = rng.uniform(-1.5, 1.5, 2)
            guard = rng.uniform(-1.5, 1.5, 2)
            bystanders = [rng.uniform(-1.5, 1.5, 2) for _ in range(k)]
            utterance = rng.uniform(-1, 1, int(rng.integers(0, 3)))
            state, roles, action = guard_world(vip, guard, bystanders, utterance)
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
            got = bodyguard_reward(state, 1, action, roles, params)
            assert abs(got.total - expected) < 1e-12

    def test_breakdown_identity_and_bounds(self, rng):
        params = ThreatParams()
        for _ in range(300):
            k = int(rng.integers(0, 8))
            state, roles, action = guard_world(
                rng.uniform(-1.5, 1.5, 2),
                rng.uniform(-1.5, 1.5, 2),
                [rng.uniform(-1.5, 1.5, 2) for _ in range(k)],
                rng.uniform(-1, 1, 1),
            )
            b = bodyguard_reward(state, 1, action, roles, params)
            assert b.total == b.residual_threat_term + b.band_penalty + b.utterance_penalty
            assert -1.0 <= b.residual_threat_term <= 0.0
            assert -2.0 + params.utterance_penalty <= b.total <= 0.0

    def test_monotone_in_bystander_distance(self):
        params = ThreatParams()
        totals = []
        for x in (0.1, 0.3, 0.6, 1.2, 2.4):
            state, roles, action = guard_world((0, 0), (0.3, 0), [(x, 0), (0.0, 0.5)])
            totals.append(bodyguard_reward(state, 1, action, roles, params).residual_threat_term)
        assert totals == sorted(totals)

    def test_residual_permutation_invariant(self, rng):
        params = ThreatParams()
        bystanders = [rng.uniform(-1, 1, 2) for _ in range(6)]
        state, roles, action = guard_world((0, 0), (0.3, 0), bystanders)
        base = bodyguard_reward(state, 1, action, roles, params).residual_threat_term
        for _ in range(1000):
            perm = rng.permutation(6)
            state2, roles2, action2 = guard_world((0, 0), (0.3, 0), [bystanders[j] for j in perm])
            other = bodyguard_reward(state2, 1, action2, roles2, params).residual_threat_term
            assert abs(other - base) < 1e-12


class TestInstantaneousThreat:
    def test_no_bystanders_zero(self):
        state, roles, _ = guard_world((0, 0), (0.3, 0), [])
        assert instantaneous_threat(state, roles, ThreatParams()) == 0.0

    def test_single_factor_identity(self):
        params = ThreatParams(threat_gain=1.0, threat_range=1.0)
        # TL = 0.3 at distance -ln(0.3)
        d = -math.log(0.3)
        state, roles, _ = guard_world((0, 0), (0.3, 0), [(d, 0)])
        assert abs(instantaneous_threat(state, roles, params) - 0.3) < 1e-12

    def test_three_bystanders_frozen(self):
        params = ThreatParams(threat_gain=1.0, threat_range=1.0)
        dists = [-math.log(0.1), -math.log(0.2), -math.log(0.3)]
        state, roles, _ = guard_world((0, 0), (0.3, 0), [(d, 0) for d in dists])
        assert abs(instantaneous_threat(state, roles, params) - 0.496) < 1e-12

    def test_equals_negated_residual(self, rng):
        params = ThreatParams()
        for _ in range(100):
            k = int(rng.integers(0, 5))
            state, roles, action = guard_world(
                rng.uniform(-1, 1, 2),
                rng.uniform(-1, 1, 2),
                [rng.uniform(-1, 1, 2) for _ in range(k)],
            )
            residual = bodyguard_reward(state, 1, action, roles, params).residual_threat_term
            threat = instantaneous_threat(state, roles, params)
            assert threat == 1.0 - (1.0 + residual)


def fake_trace(threats):
    state, roles, action = guard_world((0, 0), (0.3, 0), [])
    records = [
        StepRecord(state=state, actions=[action, action], rewards=[0.0], threat=t)
        for t in threats
    ]
    return EpisodeTrace(records=records, seed=0, config_digest="0" * 16, roles=roles)


class TestCumulativeThreat:
    def test_all_zero(self):
        assert cumulative_threat(fake_trace([0.0] * 25)) == 0.0

    def test_constant_half_over_25_steps(self):
        assert cumulative_threat(fake_trace([0.5] * 25)) == 12.5

    def test_monotone_under_append(self, rng):
        threats = list(rng.uniform(0, 1, 30))
        partial = [cumulative_threat(fake_trace(threats[: k + 1])) for k in range(30)]
        assert partial == sorted(partial)

    def test_empty_rejected(self):
        trace = fake_trace([0.5])
        trace.records = []
        with pytest.raises(ContractViolation):
            cumulative_threat(trace)


class TestThreatParamsValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"threat_gain": 0.0},
            {"threat_range": -1.0},
            {"min_distance": -0.1},
            {"min_distance": 0.7, "safe_distance": 0.6},
            {"min_distance": 0.6, "safe_distance": 0.6},
            {"utterance_penalty": 0.01},
            {"utterance_threshold": 0.0},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigError):
            ThreatParams(**kwargs)
