"""Variational preparation of Gibbs states by free-energy minimization.

Dense statevector simulation of a Trotterized adiabatic ansatz on a
purification, with the entropy term estimated through a certified Fourier
series of ln p and the energy term through an LCU measurement.
"""
from ._accel import backend
from .ansatz import AnsatzConfig, AnsatzParameters, ansatz_state, evolve, feasibility_projection
from .circuits import (QueryCostReport, energy_estimation_cost, energy_probability,
                       entropy_estimation_cost, fourier_term_probability, sample_bernoulli)
from .errors import (CertificateError, ConfigurationError, DomainError, GibbsVarError,
                     InfeasibleParametersError, ResourceError, SpectrumWarning, ValidationError)
from .fourierlog import RealFourierSeries, build_log_series
from .hamiltonians import (AdiabaticFamily, PauliString, PauliSum, gibbs_free_energy, gibbs_state,
                           lcu_decompose, random_instance, to_matrix)
from .numkernel import DensityMatrix, PureStateVector, partial_trace, trace_distance
from .optimize import OptimizationTrace, gradient_descent, powell_minimize
from .variational import (ObjectiveConfig, entropy_fourier, free_energy, run_experiment,
                          von_neumann_entropy)

__version__ = "0.1.0"
