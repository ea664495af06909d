"""Tour of the particle world: reset, forces, stepping, observations.

Run:  python demos/01_world_and_physics.py
"""

import numpy as np

from vipguard import (
    AgentAction,
    EntityState,
    PhysicsConfig,
    ScenarioConfig,
    observe,
    pairwise_contact_force,
    reset_world,
    step_world,
    zero_action,
)

# A world is placed uniformly at random from a seed; same seed, same world.
cfg = ScenarioConfig(n_bodyguards=2, n_bystanders=3, n_landmarks=4)
world = reset_world(cfg, seed=7)
print(f"{world.n_agents} agents, {world.n_landmarks} landmarks")
print("agent 0 starts at", world.agents[0].position.round(3))

# Velocities integrate applied force with damping; a single push decays away.
physics = PhysicsConfig()
state = world
push = [AgentAction(force=np.array([1.0, 0.0]))] + [zero_action()] * (world.n_agents - 1)
coast = [zero_action()] * world.n_agents
state = step_world(state, push, physics)
print("\nafter one pushed step, agent 0 velocity:", state.agents[0].velocity.round(3))
for _ in range(6):
    state = step_world(state, coast, physics)
print("after six coasting steps:            ", state.agents[0].velocity.round(3))

# Overlapping discs repel each other along the center line, equal and opposite.
a = EntityState(position=np.array([0.00, 0.0]), velocity=np.zeros(2))
b = EntityState(position=np.array([0.06, 0.0]), velocity=np.zeros(2))
print("\ncontact force on a:", pairwise_contact_force(a, b, physics).round(3))
print("contact force on b:", pairwise_contact_force(b, a, physics).round(3))

# Observations are flat vectors: per entity [dx, dy, vx, vy] relative to the
# observer (own block first, so it starts with 0, 0), then all utterances.
obs = observe(world, 0)
print(f"\nobservation length: {len(obs)}  (= ({world.n_agents}+{world.n_landmarks}) * 4)")
print("own block:", obs[:4].round(3))
print("entity 1 block:", obs[4:8].round(3))
