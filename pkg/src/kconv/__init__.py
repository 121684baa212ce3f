"""2D compressible Euler finite volume schemes and K-convergence analysis.

The FLM scheme (upwind flux with density and velocity dissipation) and a
second-order GRP scheme run on uniform periodic grids of the unit square;
solutions on nested meshes are compared through Cesàro averages, first
variances and Wasserstein distances of their empirical measures.
"""
from .analysis import (
    ConvergenceTable,
    cesaro_average,
    convergence_table,
    error_metrics,
    first_variance,
    jensen_energy_defect,
    observed_orders,
)
from .bench import (
    ExperimentConfig,
    PerturbationSpec,
    kh_initial,
    load_config,
    load_stack,
    rm_initial,
    run_experiment,
    smooth_wave_initial,
    sod_initial,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    DomainError,
    KconvError,
    ParameterError,
    SolverError,
    StepRejected,
    VacuumError,
)
from .euler import ConservedField, GasModel, Grid2D, PrimitiveState
from .flm import FaceTrace, FlmParams, flm_step, run_flm, stable_dt
from .grp import LinearReconstruction, godunov_step, grp_step, minmod, run_grp
from .riemann import RiemannFan, exact_riemann, riemann_fan, star_pressure
from .stack import SolutionStack, prolong
from .wasserstein import DiscreteMeasure, TransportPlan, e4_field, wq_distance

__version__ = "0.1.0"
