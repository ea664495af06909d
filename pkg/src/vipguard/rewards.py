"""Threat metric and bodyguard reward.

Each bystander threatens the VIP with level exp(-gain * distance / range),
a proximity score in (0, 1]. The bodyguard reward combines three terms:

    residual threat   -1 + prod_i (1 - TL_i)      shared by all bodyguards
    band penalty      0 inside [min_distance, safe_distance] of the VIP, else -1
    utterance penalty `utterance_penalty` when the agent speaks, else 0

The episode evaluation metric is the cumulative threat: the per-step
1 - prod_i (1 - TL_i) summed over all steps, lower is better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigError, ContractViolation

if TYPE_CHECKING:
    from .scenario import EpisodeTrace, RoleAssignment
    from .world import AgentAction, WorldState


@dataclass(frozen=True)
class ThreatParams:
    """Reward constants.

    `threat_gain` and `threat_range` set the exponential falloff of a
    bystander's threat with distance; `min_distance`/`safe_distance` bound the
    no-penalty annulus a bodyguard must hold around the VIP;
    `utterance_penalty` (nonpositive) is charged when any utterance component
    exceeds `utterance_threshold` in magnitude.
    """

    threat_gain: float = 1.0
    threat_range: float = 0.35
    min_distance: float = 0.15
    safe_distance: float = 0.6
    utterance_penalty: float = -0.05
    utterance_threshold: float = 1e-6

    def __post_init__(self):
        if self.threat_gain <= 0:
            raise ConfigError(f"threat_gain must be positive, got {self.threat_gain}")
        if self.threat_range <= 0:
            raise ConfigError(f"threat_range must be positive, got {self.threat_range}")
        if not 0 <= self.min_distance < self.safe_distance:
            raise ConfigError(
                "need 0 <= min_distance < safe_distance, got "
                f"[{self.min_distance}, {self.safe_distance}]"
            )
        if self.utterance_penalty > 0:
            raise ConfigError(
                f"utterance_penalty must be nonpositive, got {self.utterance_penalty}"
            )
        if self.utterance_threshold <= 0:
            raise ConfigError(
                f"utterance_threshold must be positive, got {self.utterance_threshold}"
            )


@dataclass(frozen=True)
class RewardBreakdown:
    """One bodyguard's reward split into its three terms; `total` is their sum."""

    residual_threat_term: float
    band_penalty: float
    utterance_penalty: float
    total: float


def threat_level(dist: float, params: ThreatParams) -> float:
    """Threat from one bystander at the given distance; in (0, 1], 1 at contact."""
    if dist < 0:
        raise ContractViolation(f"distance must be nonnegative, got {dist}")
    return math.exp(-params.threat_gain * dist / params.threat_range)


def distance_band_penalty(bodyguard_pos, vip_pos, params: ThreatParams) -> float:
    """0 when the bodyguard sits inside the band around the VIP, else -1.

    Both band boundaries are inclusive.
    """
    delta = np.asarray(bodyguard_pos, dtype=float) - np.asarray(vip_pos, dtype=float)
    dist = float(np.sqrt(delta @ delta))
    if params.min_distance <= dist <= params.safe_distance:
        return 0.0
    return -1.0


def _survival_product(state: "WorldState", roles: "RoleAssignment", params: ThreatParams) -> float:
    """prod over bystanders of (1 - TL(VIP, bystander)); 1.0 with no bystanders."""
    vip_pos = state.agents[roles.vip_index].position
    product = 1.0
    for b in roles.bystander_indices:
        delta = state.agents[b].position - vip_pos
        dist = float(np.sqrt(delta @ delta))
        product *= 1.0 - threat_level(dist, params)
    return product


def bodyguard_reward(
    state: "WorldState",
    bodyguard_id: int,
    action: "AgentAction",
    roles: "RoleAssignment",
    params: ThreatParams,
) -> RewardBreakdown:
    """Per-step reward for one bodyguard, evaluated on the post-step state."""
    if bodyguard_id not in roles.bodyguard_indices:
        raise ContractViolation(f"agent {bodyguard_id} is not a bodyguard")
    residual = -1.0 + _survival_product(state, roles, params)
    band = distance_band_penalty(
        state.agents[bodyguard_id].position,
        state.agents[roles.vip_index].position,
        params,
    )
    spoke = action.utterance.size > 0 and float(
        np.max(np.abs(action.utterance))
    ) > params.utterance_threshold
    utter = params.utterance_penalty if spoke else 0.0
    return RewardBreakdown(
        residual_threat_term=residual,
        band_penalty=band,
        utterance_penalty=utter,
        total=residual + band + utter,
    )


def instantaneous_threat(
    state: "WorldState", roles: "RoleAssignment", params: ThreatParams
) -> float:
    """Combined threat to the VIP right now: 1 - prod(1 - TL), in [0, 1]."""
    return 1.0 - _survival_product(state, roles, params)


def cumulative_threat(trace: "EpisodeTrace") -> float:
    """Sum of the per-step threat over a whole episode; lower is better."""
    if not trace.records:
        raise ContractViolation("cumulative threat of an empty trace is undefined")
    return sum(record.threat for record in trace.records)
