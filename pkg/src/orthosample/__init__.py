"""Sampling from densities restricted to implicit level-set manifolds.

The constrained updates decompose each velocity into a drift along the
constraint gradient (driving g toward zero at a prescribed rate) and a
projected component that performs Langevin or Stein variational motion in
the tangent space, plus the divergence correction that keeps the stationary
density right.
"""

from .ensemble import ParticleEnsemble
from .errors import (
    BadSchedule,
    ConfigError,
    DegenerateEnsemble,
    DimensionMismatch,
    NonFiniteEvaluation,
    NonPositiveBandwidth,
    NonPositiveEta,
    OrthosampleError,
    SamplerRuntimeError,
    SingularGradient,
    UnstableStepSize,
)
from .geometry import (
    ConstraintSpec,
    GeometryReport,
    PsiParams,
    affine_constraint,
    check_identities,
    correction_field,
    projection_matrix,
    psi,
    sphere_constraint,
    v_sharp,
)
from .kernels import (
    KernelSpec,
    div_y_k_perp,
    k_perp,
    median_bandwidth,
    rbf,
    surrogate_grad_k_perp,
)
from .metrics import (
    MetricSeries,
    energy_distance,
    mae,
    orthogonal_fisher,
    stein_residual,
    support_bound,
)
from .oracles import FdConfig, fd_divergence_matrix, fd_gradient, fd_hessian, mc_mean, rk4_integrate
from .samplers import (
    RunRecord,
    SamplerConfig,
    annealed_mh_reference,
    langevin_step,
    o_langevin_step,
    o_svgd_step,
    o_svgd_velocities,
    run_sampler,
    svgd_step,
)
from .targets import (
    TargetDensity,
    TemperedTarget,
    synthetic_constraint,
    synthetic_ground_truth,
    synthetic_target,
    tempered_target,
)

__version__ = "0.1.0"
