"""Numerical laboratory for certified finite-time blow-up of semilinear
heat equations u_t = Lap(u) + f(u) with homogeneous Dirichlet data."""

from . import backends
from .certificate import Certificate, blow_up_certificate, initial_energy_J0, remark_constant_M
from .errors import (
    BetaConstraintViolated,
    BlowupError,
    ConditionCViolated,
    GridMismatch,
    InsufficientRecords,
    InvalidSampleRange,
    NegativeInitialData,
    NonConvergence,
    NonFiniteState,
    ParseError,
    ValidationError,
    ZeroField,
)
from .evolution import (
    BlewUp,
    SolverConfig,
    StepUnderflow,
    Survived,
    Trajectory,
    concavity_defect,
    export_trajectory_csv,
    minimal_concavity_M,
    monitor_J,
    run_until_blowup,
    step_imex,
)
from .grid import (
    Domain,
    Field,
    Grid,
    Interval,
    Rectangle,
    apply_laplacian,
    build_grid,
    dirichlet_energy,
    integrate,
    quadrature_measure,
    sample_function,
    zero_field,
)
from .nonlinearity import (
    ConditionParams,
    ConditionVerdict,
    ExpMinusOne,
    Nonlinearity,
    Polynomial,
    Power,
    PowerPlusLinear,
    check_condition_C,
    check_condition_IBB,
    check_condition_PP,
    condition_margin,
    eval_F,
    eval_f,
    search_condition_params,
)
from .scenario import Scenario, build_initial_data, parse_scenario
from .spectral import (
    Eigenpair,
    analytic_lambda0,
    discrete_lambda0,
    principal_eigenpair,
    rayleigh_quotient,
)

__version__ = "0.1.0"
