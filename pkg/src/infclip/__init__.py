"""Clipped online-mirror-descent algorithms for heavy-tailed multi-armed bandits.

Linear bandits: an implicitly normalized forecaster over the Tsallis-entropy
prox whose importance-weighted loss estimates are clipped rather than
skipped.  Nonlinear bandits: a gradient-free clipped stochastic mirror
descent built on one-point sphere estimates.  Plus heavy-tailed samplers,
closed-form parameter planners, baseline policies and a reproducible
experiment harness.
"""

from .clipping import (
    ClipLevel,
    GradientEstimate,
    clip_lemma_report,
    clip_scalar,
    clip_vector,
    iw_clipped_estimate,
    qnorm,
)
from .distributions import (
    HeavyTailSpec,
    LogPareto,
    ParetoScaled,
    PointMass,
    experiment_arms,
    log_pareto_normalizer,
    unit_moment_arms,
)
from .environments import (
    ArmEnvironment,
    ConstantAdversary,
    FunctionEnvironment,
    LinearSimplexEnv,
    NormBallEnv,
    QuadraticBallEnv,
    SignAdversary,
    ZeroAdversary,
    two_arm_experiment_env,
)
from .bench import (
    AggregateCurve,
    ExperimentConfig,
    load_config,
    moving_average,
    run_experiment,
    write_csv,
    write_meta,
)
from .planners import (
    PlannerOutput,
    Theorem1Plan,
    ZoConfig,
    a_q_constant,
    ball_prox_geometry,
    plan_parameters,
    sigma_q_power,
    simplex_prox_geometry,
    theorem1_planner,
)
from .policies import InfClipPolicy, PolicyTrace, RobustUcbPolicy, SkipInfPolicy, run_policy
from .rng import SeededRng
from .tsallis import (
    StepSolveDiagnostics,
    TsallisConfig,
    bregman_divergence,
    omd_step,
    step_objective,
    tsallis_potential,
)
from .verify import VerifyReport, verify_all
from .zeroth_order import (
    EuclideanBallProx,
    PROX_REGISTRY,
    ShiftedNegentropySimplexProx,
    ZoTrace,
    make_prox,
    one_point_gradient,
    run_zo,
    sample_sphere,
    smoothing_gap_check,
    zo_step,
)

__version__ = "0.1.0"
