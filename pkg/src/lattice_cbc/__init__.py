"""Component-by-component construction of rank-1 lattice rules with
weights chosen from derivative bounds of the integrand."""

from .numerics import zeta, zeta_prime, fit_power_law, bernoulli2
from .weights import (CoordinateSequence, OrderSequence, NormBoundSpec, WeightScheme,
                      norm_bound, lambda_weights)
from .wce import GeneratingVector, wce_product, wce_pod_fixed_z, wce_bruteforce, wce_upper_bound
from .engine import CbcEngine, kernel_matvec, naive_matvec, cbc_product, cbc_pod
from .construct import dcbc_product, dcbc_pod, icbc, icbc_objective, icbc_objective_derivative
from .results import ConstructionResult

__all__ = [
    "zeta", "zeta_prime", "fit_power_law", "bernoulli2",
    "CoordinateSequence", "OrderSequence", "NormBoundSpec", "WeightScheme",
    "norm_bound", "lambda_weights",
    "GeneratingVector", "wce_product", "wce_pod_fixed_z", "wce_bruteforce", "wce_upper_bound",
    "CbcEngine", "kernel_matvec", "naive_matvec", "cbc_product", "cbc_pod",
    "dcbc_product", "dcbc_pod", "icbc", "icbc_objective", "icbc_objective_derivative",
    "ConstructionResult",
]
