"""Free-particle probability backflow: states, dynamics, phase space and the spectral bound."""
from .errors import (BackflowError, ConfigError, ConvergenceError, DegenerateStateError, ExtrapolationError,
                     InvalidArgumentError, NumericalError, ResolutionError, TruncationError)
from .scales import PhysicalScales, from_dimensionless, to_dimensionless
from .states import (ClassicalState, GaussianComponent, MomentumGridSpec, MomentumState, build_momentum_state,
                     reference_classical_bus, reference_quantum_bus, scale_state)
from .dynamics import (ProbabilitySeries, SpaceTimeField, backflow_amount, evolve, left_probability,
                       left_probability_series, probability_current, right_probability)
from .classical import PhaseSpaceGrid, classical_joint, quadrant_probability, shear_evolve, wedge_probability
from .wigner import WignerGrid, WignerGridSpec, wigner_quadrant, wigner_shear_check, wigner_transform, wigner_wedge
from .spectral import (BackflowSolution, KernelMatrix, assemble, export_optimal_state, extrapolate_bound,
                       kernel_entry, max_eigenvalue, solve_backflow)

__version__ = "0.1.0"

__all__ = [
    "BackflowError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateStateError",
    "ExtrapolationError",
    "InvalidArgumentError",
    "NumericalError",
    "ResolutionError",
    "TruncationError",
    "PhysicalScales",
    "from_dimensionless",
    "to_dimensionless",
    "ClassicalState",
    "GaussianComponent",
    "MomentumGridSpec",
    "MomentumState",
    "build_momentum_state",
    "reference_classical_bus",
    "reference_quantum_bus",
    "scale_state",
    "ProbabilitySeries",
    "SpaceTimeField",
    "backflow_amount",
    "evolve",
    "left_probability",
    "left_probability_series",
    "probability_current",
    "right_probability",
    "PhaseSpaceGrid",
    "classical_joint",
    "quadrant_probability",
    "shear_evolve",
    "wedge_probability",
    "WignerGrid",
    "WignerGridSpec",
    "wigner_quadrant",
    "wigner_shear_check",
    "wigner_transform",
    "wigner_wedge",
    "BackflowSolution",
    "KernelMatrix",
    "assemble",
    "export_optimal_state",
    "extrapolate_bound",
    "kernel_entry",
    "max_eigenvalue",
    "solve_backflow",
]

