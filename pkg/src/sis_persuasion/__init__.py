"""Signal design for protection adoption in SIS epidemics.

Computes stationary Nash equilibria of the signaling game, the optimal
static signal, and optimal dynamic (time-varying) signal schedules, plus
the batch experiment drivers and command-line interface around them.
"""

from .equilibrium import (
    ComplementarityReport,
    MonotonicityReport,
    SneCase,
    SneResult,
    StaticSignalResult,
    Thresholds,
    complementarity_report,
    ibar_indifference_root,
    monotonicity_certificate,
    optimal_static_signal,
    solve_sne,
    thresholds,
)
from .model import (
    AssumptionReport,
    ModelParams,
    PopulationState,
    Signal,
    check_assumptions,
    effective_rate,
    endemic_level,
    posterior_infected,
    posterior_susceptible,
    utility_gap,
)
from .optimal_control import (
    CompareReport,
    OcpSolution,
    OcpSpec,
    SolverOptions,
    StageCost,
    compare_static_dynamic,
    gradient,
    objective,
    solve,
)
from .simulate import (
    ControlSchedule,
    IntegrateOptions,
    SmithConfig,
    Trajectory,
    integral_of_y,
    integrate,
    rhs,
)
from .sweep import MuiGrid, StaticSweepTable, grid_mui, static_sweep

__version__ = "0.1.0"
