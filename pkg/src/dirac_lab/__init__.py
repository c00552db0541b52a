"""Resonances of 1D massless Dirac operators with compactly supported potentials."""

from dirac_lab.errors import (
    BoundaryZeroError,
    DiracLabError,
    DivergentIntegralError,
    EvaluationRangeError,
    InvalidPotentialError,
    TruncationError,
)
from dirac_lab.potential import Cell, Potential, builtin, from_cells, from_samples, l1_norm
from dirac_lab.jost import (
    JostValue,
    SeriesResult,
    cell_propagator,
    jost_a_prime,
    jost_a_series,
    jost_ab,
    smatrix,
)
from dirac_lab.rootfinder import (
    Rectangle,
    Resonance,
    RootConfig,
    WindingCount,
    counting_function,
    find_resonances,
    wind,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryZeroError",
    "Cell",
    "DiracLabError",
    "DivergentIntegralError",
    "EvaluationRangeError",
    "InvalidPotentialError",
    "JostValue",
    "Potential",
    "Rectangle",
    "Resonance",
    "RootConfig",
    "SeriesResult",
    "TruncationError",
    "WindingCount",
    "builtin",
    "cell_propagator",
    "counting_function",
    "find_resonances",
    "from_cells",
    "from_samples",
    "jost_a_prime",
    "jost_a_series",
    "jost_ab",
    "l1_norm",
    "smatrix",
    "wind",
]
