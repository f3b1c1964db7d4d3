"""Fock-space simulation of continuous-variable quantum teleportation."""

__version__ = "0.1.0"

from .errors import ConvergenceError, GridCoverageError, TruncationWarning, ValidationError
from .fock import (DensityMatrix, FockState, Operator, TruncationConfig, TwoModeState,
                   annihilation, basis_state, coherent_state, creation, displace_state,
                   displacement, fidelity, partial_trace, quadrature_ops,
                   quadrature_wavefunction, random_state, von_neumann_entropy)
from .entanglement import (SqueezeParam, entropy_closed_form, entropy_numeric,
                           entropy_sweep, squeezed_state)
from .epr import (KAPPA, GammaTable, IntegrationConfig, OutcomeGrid, completeness_constant,
                  gamma_closed_form, gamma_integral_oracle, phi00, unitarity_residual)
from .teleport import (MeasurementOutcome, OutcomeDistribution, ProtocolRun,
                       average_fidelity, bob_correction_discrete,
                       bob_correction_displacement, conditional_state, covering_grid,
                       outcome_distribution, run_protocol, run_samples, sample_outcome)
