"""Tail and density asymptotics for exponential functionals of subordinators."""

__version__ = "0.1.0"

from .errors import (ConfigurationError, DomainError, NumericalError, ResourceError,  # noqa: E402
                     SingularityError, StatisticalPowerError, SubexpError,
                     UnsupportedRegimeError)
from .levy import (ABC, BarrierWalk, BetaCoalescent, CompoundPoisson,  # noqa: E402
                   GammaSubordinator, InfinitePowerTail, LevyModel, Stable, check_H,
                   exact_moments, phi, phi_derivative, pi_tail, x_psi)
from .psi import PsiEvaluator, gamma_psi_closed  # noqa: E402
from .asymptotics import (AsymptoticForm, closed_form, density_log_asym,  # noqa: E402
                          fprime_expansion, mz_constant, tail_log_asym)

__all__ = ["__version__", "SubexpError", "DomainError", "ConfigurationError", "NumericalError",
           "SingularityError", "UnsupportedRegimeError", "StatisticalPowerError",
           "ResourceError", "LevyModel", "Stable", "GammaSubordinator", "ABC", "BetaCoalescent",
           "BarrierWalk", "CompoundPoisson", "InfinitePowerTail", "phi", "phi_derivative",
           "pi_tail", "x_psi", "check_H", "exact_moments", "PsiEvaluator", "gamma_psi_closed",
           "AsymptoticForm", "closed_form", "tail_log_asym", "density_log_asym",
           "fprime_expansion", "mz_constant"]
