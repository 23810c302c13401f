"""Splitting-based solver for coupled passive linear systems.

Passive subsystems (port-Hamiltonian nodes) are composed through a
monotone port coupling; the closed loop is integrated either monolithically
or by an alternating resolvent splitting whose iterates come with computable
convergence certificates.
"""

from .errors import (
    BadParams,
    CouplingNotMonotone,
    DimensionMismatch,
    EmptyList,
    GridMismatch,
    NegativeOmega,
    NonconformingInterface,
    NotDissipative,
    NotPSOP,
    OmegaZero,
    ParseError,
    SamplingMismatch,
    SingularClosedLoop,
    SingularCoupling,
    SingularResolvent,
    SingularStep,
    ValidationError,
    WeightNotSPD,
)
from .trajectory import (
    MIDPOINT,
    NODE,
    GridTrajectory,
    TimeGrid,
    TrajPair,
    l2_inner,
    l2_norm,
    lincomb,
    read_csv,
    sup_norm,
    to_midpoints,
    weighted_norm,
    write_csv,
)
from .node import (
    DISSIPATIVITY_TOL,
    CouplingOperator,
    DissipativityReport,
    PsopEstimate,
    SystemNode,
    assemble_node,
    check_coupling_monotone,
    check_dissipativity,
    compose_diagonal,
    estimate_psop_epsilon,
    transfer_function,
)
from .operators import (
    CoupledProblem,
    EnergyBalanceReport,
    MonotonicityReport,
    OperatorImage,
    apply_I_plus_lambda_M,
    apply_M,
    apply_resolvent_N,
    cayley_N,
    check_discrete_monotonicity,
    discrete_energy_balance,
    image_diff,
    image_norm,
    monotonicity_slack,
    pair_diff,
    pair_norm,
    reflect,
    resolve_M,
    simulate_midpoint,
)
from .monolithic import solve_monolithic
from .iteration import (
    ConvergenceReport,
    IterationState,
    ReportRow,
    check_psop_bound,
    check_theorem_a,
    check_theorem_b_bound,
    check_theorem_c_bound,
    init_state,
    iterate_once,
    run,
)
from .models import (
    EdgeSpec,
    HeatCGParams,
    Wave1dParams,
    Wave2dParams,
    build_heat_cg1d,
    build_lshape_problem,
    build_scalar_demo,
    build_wave1d,
    build_wave2d_rect,
    build_wave_heat_problem,
    heat_kernel_total_mass,
    scalar_demo_pole,
)

__version__ = "0.1.0"
