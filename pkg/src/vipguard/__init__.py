"""Particle-world VIP escort: simulation, threat reward, and MADDPG/DDPG training.

A 2D world holds a scripted VIP walking to a goal landmark, scripted
bystanders wandering between landmarks, and a team of learning bodyguards.
Bodyguards are rewarded for keeping a protective distance band around the
VIP while bystander proximity threat stays low; training uses deterministic
policy gradients with either local (DDPG) or centralized (MADDPG) critics.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, default_config_dict, load_run_config, parse_run_config
from .errors import (
    CheckpointError,
    ConfigError,
    ContractViolation,
    ControllerError,
    TrainingDivergence,
    TrajectoryError,
)
from .evaluate import (
    BASELINE_NAMES,
    EvalReport,
    evaluate,
    make_baseline,
    policy_controller,
    random_controller,
    scripted_ring_controller,
    stationary_controller,
)
from .nets import (
    ForwardCache,
    GradBundle,
    MlpParams,
    OptState,
    backward,
    clip_grad_norm,
    forward,
    grad_global_norm,
    init_mlp,
    init_opt_state,
    opt_step,
    soft_update,
)
from .render import RenderStyle, render_frame, render_trace
from .rewards import (
    RewardBreakdown,
    ThreatParams,
    bodyguard_reward,
    cumulative_threat,
    distance_band_penalty,
    instantaneous_threat,
    threat_level,
)
from .scenario import (
    ARRIVAL_RADIUS,
    BYSTANDER_SPEED_FACTOR,
    VIP_SPEED_FACTOR,
    BodyguardController,
    EpisodeTrace,
    RoleAssignment,
    ScenarioConfig,
    StepRecord,
    build_scenario,
    bystander_policy,
    run_episode,
    scenario_digest,
    vip_policy,
)
from .trajectory import read_trajectory, write_trajectory
from .training import (
    Batch,
    EpisodeLog,
    LearnerBundle,
    ReplayBuffer,
    TrainConfig,
    Transition,
    action_dim,
    actor_update,
    critic_input,
    critic_input_dim,
    critic_update,
    init_learner,
    obs_dim,
    select_action,
    train,
    training_log_text,
)
from .world import (
    AGENT_RADIUS,
    LANDMARK_RADIUS,
    AgentAction,
    EntityState,
    PhysicsConfig,
    WorldState,
    observation_size,
    observe,
    observe_stack,
    pairwise_contact_force,
    reset_world,
    step_world,
    zero_action,
)

__version__ = "0.1.0"
