"""Jost coefficients a(lambda), b(lambda) of the massless Dirac system."""

from dirac_lab.jost.api import JostValue, jost_a_prime, jost_ab, log_abs_a, smatrix
from dirac_lab.jost.series import SeriesResult, jost_a_series
from dirac_lab.jost.transfer import TransferResult, cell_propagator, transfer

__all__ = [
    "JostValue",
    "SeriesResult",
    "TransferResult",
    "cell_propagator",
    "jost_a_prime",
    "jost_a_series",
    "jost_ab",
    "log_abs_a",
    "smatrix",
    "transfer",
]
