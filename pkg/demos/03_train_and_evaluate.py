"""Train a small bodyguard team and compare it against the baselines.

Learning on the reduced scene takes off after roughly a thousand episodes;
1500 episodes are enough to see the reward climb as the escort forms.
Takes about a minute on one core.

Run:  python demos/03_train_and_evaluate.py
"""

import numpy as np

from vipguard import (
    ScenarioConfig,
    TrainConfig,
    evaluate,
    make_baseline,
    policy_controller,
    train,
)

scenario = ScenarioConfig(n_bodyguards=1, n_bystanders=2, n_landmarks=3)
config = TrainConfig(
    episodes=1500,
    batch_size=256,
    update_every=25,
    warmup_transitions=1000,
    hidden_sizes=(32, 32),
    buffer_capacity=100_000,
    seed=0,
)

print("training", config.episodes, "episodes ...")
bundle, logs = train(scenario, config, progress=lambda log: print(
    f"  episode {log.episode + 1:4d}  return {log.mean_return:7.2f}  "
    f"threat {log.cumulative_threat:5.2f}  noise {log.noise_scale:.3f}"
) if (log.episode + 1) % 100 == 0 else None)

returns = [log.mean_return for log in logs]
print("mean return, first vs last 100 episodes:",
      round(float(np.mean(returns[:100])), 2), "->",
      round(float(np.mean(returns[-100:])), 2))

print("\nnoise-free evaluation over 50 shared worlds:")
controllers = {
    "trained": policy_controller(bundle),
    "stationary": make_baseline("stationary", scenario),
    "random": make_baseline("random", scenario),
    "scripted-ring": make_baseline("scripted-ring", scenario),
}
for name, controller in controllers.items():
    report = evaluate(scenario, controller, 50, seed=123, controller_name=name)
    print(f"  {name:13s} threat {report.threat_mean:7.4f}   reward {report.reward_mean:8.2f}")
