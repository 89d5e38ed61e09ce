"""KL-form generalization bounds for finite hypothesis spaces.

Modules:

- ``divergences``: discrete distributions, Markov kernels, Rényi / chi-squared /
  Hellinger / f-divergences and binary-KL inversion.
- ``change_of_measure``: event-probability bounds and a randomized checker.
- ``bounds``: budget formulas, certificates and sweeps.
- ``experiment``: the synthetic logistic benchmark and coverage Monte Carlo.
- ``cli``: the ``dpipac`` command.
"""

from .bounds import BoundCertificate, BoundRequest, certify, rhs
from .divergences import DiscreteDistribution, MarkovKernel, binary_kl, kl_inverse_upper

__all__ = [
    "BoundCertificate",
    "BoundRequest",
    "DiscreteDistribution",
    "MarkovKernel",
    "binary_kl",
    "certify",
    "kl_inverse_upper",
    "rhs",
]
__version__ = "0.1.0"
