"""Assembly, linear and nonlinear solves, and coupled time stepping."""

from .assembly import (
    AssembledSystem,
    DofMap,
    ScalarContext,
    SparsityPattern,
    assemble_mechanics,
    assemble_scalar,
    facet_load,
    small_strain,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .coupling import (
    CouplingSchedule,
    DirichletBC,
    Field,
    INCREMENT_LIMIT,
    IncrementError,
    NeumannBC,
    Physics,
    Problem,
    TransientResult,
    VolumeSource,
    run_transient,
    step_increment,
)
from .linear import Constraints, SingularMatrixError, apply_dirichlet, linear_solve
from .newton import ConvergenceReport, NewtonError, newton_solve
from .physics import (
    CorrosionPhasePhysics,
    FluidPhysics,
    FracturePhysics,
    HeatPhysics,
    HydrogenPhysics,
    IonTransportPhysics,
    MechanicsPhysics,
    ScalarKernelPhysics,
)
