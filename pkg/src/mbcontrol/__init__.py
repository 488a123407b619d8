"""Robust multi-Bernoulli multi-target tracking with
information-driven sensor control."""

from .core import (
    BernoulliComponent,
    CardinalityCapError,
    DegenerateComponentError,
    HybridParticle,
    MultiBernoulliBelief,
    SampleSet,
    cardinality_pmf,
    eval_mb_density,
    eval_mb_density_log,
    gaussian_kernel_log_norm,
    kde_density,
    resample_component,
    sample_belief,
    sample_multi_bernoulli,
    silverman_bandwidth,
    systematic_resample,
)
from .filtering import (
    BirthSpec,
    EstimateSummary,
    MeasurementModel,
    MotionModel,
    extract_estimates,
    predict,
    prune,
    update_known_params,
    update_robust,
)
from .control import (
    ControlConfig,
    PredictedDensity,
    RewardEvaluation,
    SensorCommand,
    admissible_commands,
    divergence_from_sum,
    generate_pims,
    pims_target_states,
    plan_step,
    renyi_reward,
    select_command,
)
from .scenario import (
    GroundTruth,
    ScenarioConfig,
    TargetSchedule,
    apply_command,
    default_scenario,
    default_targets,
    generate_measurements,
    step_ground_truth,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    FilterConfig,
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
    run_batch,
    run_trial,
    save_config,
)

__version__ = "0.1.0"
