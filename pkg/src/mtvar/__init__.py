"""Numerical toolkit for sharp singular Moser-Trudinger inequalities on R^N.

Modules:
    constants     dimensional constants, truncated exponential Phi_N
    nonlinearity  growth-condition checks and built-in nonlinearities F
    profiles      non-increasing radial profiles, Sobolev energy, functional J
    rearrange     symmetric decreasing rearrangement
    green         radial N-Laplacian Green function and the constant A0
    halfline      half-line chart, auxiliary variational problem, tail bound
    limits        normalized vanishing/concentrating limits and sequences
    extremal      direct maximization, sharp GNS constant, perturbation curve
    cli           command-line entry point
"""

__version__ = "0.1.0"

from .constants import MTParams, omega_sphere, phi_truncated_exp
from .errors import (ConstructionError, ContractError, DomainError,
                     EvaluationError, ExtractionError, IntegrationError,
                     MappingError, NoLimitError, OptimizerError, SolverError)
from .green import GreenTable, bessel_K0, extract_A0, green_weighted_norm, solve_green
from .halfline import (HalfLineProfile, aux_brute, aux_gamma, aux_maximizer,
                       carleson_chang_lhs, carleson_chang_rhs, to_one_d,
                       transfer_identities)
from .limits import (LimitValues, SequenceSpec, classify_sequence, compute_limits,
                     d_ncl, d_nvl, geq3_lower_bound, liruf_profile,
                     vanishing_profile)
from .nonlinearity import GrowthReport, NonlinearitySpec, check_growth_conditions
from .extremal import (OptimizationReport, compute_B_N, existence_certificate,
                       maximize_MT, perturbation_curve)
from .profiles import RadialProfile, functional_J, sobolev_energy, total_energy
from .rearrange import SampledFunction, distribution_function, symmetric_rearrangement
