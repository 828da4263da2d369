"""Length-varying pendulum walking: model, reference orbits, ankle-torque
MPC, and a planar hybrid simulator."""

from .errors import (
    AlipDomainError,
    ControlError,
    CurveFitError,
    CurveRangeError,
    NumericalError,
    OrbitSynthesisError,
    ReductionError,
    ScenarioError,
)
from .model import (
    AlipDerivative,
    AlipParams,
    AlipState,
    PlanarVec,
    com_angle,
    com_velocity_from_state,
    impact_transfer,
    linearized_dynamics,
    nonlinear_dynamics,
    pendulum_length,
    wedge,
)
from .mpc import (
    ControllerConfig,
    MpcController,
    WeightSchedule,
    condense,
    make_weight_schedule,
    mpc_step,
)
from .prediction import DiscreteStep, HorizonPrediction, build_prediction, discretize_at, rank_check
from .qp import QpProblem, QpSolution, solve_qp
from .reduced import ConstrainedSystem, ReducedSystem, assemble, output_torque_solve, schur_reduce
from .scenario import Scenario, parse_scenario
from .sim import (
    CSV_COLUMNS,
    PerturbationEvent,
    SimConfig,
    SimLog,
    SimRow,
    metrics,
    read_csv,
    rk4_step,
    run_scenario,
    write_metrics,
)
from .trajectory import (
    BezierCurve,
    NominalOrbit,
    StairGeometry,
    bezier_derivative,
    bezier_eval,
    bezier_fit,
    load_orbit,
    nominal_L,
    orbit_sample,
    save_orbit,
    synthesize_orbit,
)

__version__ = "0.1.0"
