"""Bernstein-Durrmeyer-Choquet operators over capacities, with machine checks of their error bounds."""

__version__ = "0.1.0"

from .capacities import (
    Capacity,
    Dirac,
    DistortedLebesgue,
    Distortion,
    LebesgueBorel,
    Possibility,
    Scaled,
    UnimodalDistribution,
    check_structure,
    measure,
)
from .choquet import (
    BetaQuadrature,
    SampledFunction1D,
    SampledFunctionSimplex,
    SortedLevels,
    choquet_integral,
    lp_choquet_functional,
    property_suite,
)
from .exceptions import ConfigurationError, ConvergenceWarning, StrictPositivityError
from .sets import IntervalSet, SimplexCellSet, canonicalize, set_intersection, set_union

__all__ = [
    "BetaQuadrature",
    "Capacity",
    "ConfigurationError",
    "ConvergenceWarning",
    "Dirac",
    "DistortedLebesgue",
    "Distortion",
    "IntervalSet",
    "LebesgueBorel",
    "Possibility",
    "SampledFunction1D",
    "SampledFunctionSimplex",
    "Scaled",
    "SimplexCellSet",
    "SortedLevels",
    "StrictPositivityError",
    "UnimodalDistribution",
    "canonicalize",
    "check_structure",
    "choquet_integral",
    "lp_choquet_functional",
    "measure",
    "property_suite",
    "set_intersection",
    "set_union",
]
