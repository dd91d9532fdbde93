"""Equilibrium states, dynamic averages and endogenous temperatures of closed quantum systems."""

from .config import Tolerances
from .dos import DoSHistogram, analytic_dos, energy_dos, estimate_dos, manifold_volume, sample_pure_state
from .dynamics import (
    DensityMatrix,
    PureState,
    convergence_constant,
    dephase,
    dynamic_average,
    evolve,
    finite_time_average,
    populations,
)
from .errors import *  # noqa: F401,F403
from .spectral import HermitianOperator, SpectralDecomposition, bohr_spectrum, detect_resonances, eigendecompose
from .thermo import (
    ConservedSet,
    ThermoSolution,
    conjugate_variables,
    conserved_values,
    default_commuting_set,
    degenerate_three_level_energy,
    entropy,
    grand_canonical,
    probabilities_from_values,
    solve,
    thermo_differential_check,
    two_level_beta,
    two_level_energy,
)

__version__ = "0.1.0"
