"""Free boundary logistic model with T-periodic, sign-changing coefficients."""

from .coefficients import (AsymptoticProfile, CoefficientError, PeriodicCoefficient, RobinBC,
                           build_family, check_H1, check_H2, constant, sinusoid)
from .dichotomy import (Classification, CriticalMu, classify, critical_mu, criteria_in_d,
                        spreading_errors)
from .eigen import (EigenProblem, NoConvergence, NoSignChange, eigenvalue, find_hstar,
                    lambda_infinity, principal_eigenvalue)
from .fbp import FbpState, SolveParams, Trajectory, simulate, step, stefan_identity_residual
from .periodic import PeriodicBVP, ode_periodic_logistic, solve_halfline_state, solve_periodic_bvp
from .speed import SemiWaveProblem, empirical_speed, solve_semiwave, speed_bounds

__all__ = [
    "AsymptoticProfile", "CoefficientError", "PeriodicCoefficient", "RobinBC", "build_family",
    "check_H1", "check_H2", "constant", "sinusoid",
    "Classification", "CriticalMu", "classify", "critical_mu", "criteria_in_d", "spreading_errors",
    "EigenProblem", "NoConvergence", "NoSignChange", "eigenvalue", "find_hstar", "lambda_infinity",
    "principal_eigenvalue",
    "FbpState", "SolveParams", "Trajectory", "simulate", "step", "stefan_identity_residual",
    "PeriodicBVP", "ode_periodic_logistic", "solve_halfline_state", "solve_periodic_bvp",
    "SemiWaveProblem", "empirical_speed", "solve_semiwave", "speed_bounds",
]
