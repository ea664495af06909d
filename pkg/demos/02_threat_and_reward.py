"""The threat metric and the bodyguard reward, term by term.

Run:  python demos/02_threat_and_reward.py
"""

from vipguard import (
    ScenarioConfig,
    ThreatParams,
    bodyguard_reward,
    build_scenario,
    distance_band_penalty,
    instantaneous_threat,
    threat_level,
    zero_action,
)

params = ThreatParams()
print("threat level by bystander distance (gain=1, range=0.35):")
for dist in (0.0, 0.1, 0.25, 0.5, 1.0, 2.0):
    print(f"  dist {dist:4.2f} -> TL {threat_level(dist, params):.4f}")

print("\nband penalty by bodyguard distance (band [0.15, 0.6]):")
for dist in (0.05, 0.15, 0.375, 0.6, 0.75):
    penalty = distance_band_penalty([dist, 0.0], [0.0, 0.0], params)
    print(f"  dist {dist:5.3f} -> {penalty:+.0f}")

# Full reward on a real scene: residual threat is shared, the band penalty
# is the bodyguard's own, and silence costs nothing.
cfg = ScenarioConfig(n_bodyguards=2, n_bystanders=4, n_landmarks=5)
world, roles = build_scenario(cfg)
guard = roles.bodyguard_indices[0]
breakdown = bodyguard_reward(world, guard, zero_action(), roles, params)
print("\nreward breakdown for bodyguard", guard)
print("  residual threat:", round(breakdown.residual_threat_term, 4))
print("  band penalty:   ", breakdown.band_penalty)
print("  utterance:      ", breakdown.utterance_penalty)
print("  total:          ", round(breakdown.total, 4))

threat = instantaneous_threat(world, roles, params)
print("\ninstantaneous threat:", round(threat, 4))
print("identity with residual term:", threat == 1.0 - (1.0 + breakdown.residual_threat_term))

# Moving every bystander twice as far from the VIP can only lower the threat.
vip = world.agents[roles.vip_index].position
for b in roles.bystander_indices:
    world.agents[b].position = vip + 2.0 * (world.agents[b].position - vip)
print("after spreading the crowd:", round(instantaneous_threat(world, roles, params), 4))
