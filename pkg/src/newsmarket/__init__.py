"""News-driven market sentiment dynamics.

Simulation and analysis toolkit for a two-population opinion model of a
stock market: a one-component sentiment equation driven by a measured
news series, a closed stochastic two-component model with price feedback,
the full equilibrium / bifurcation / limit-cycle analysis of the
autonomous system, and a discrete spin-kinetics oracle for the mean-field
equations.
"""

from .core import MarketState, ModelParams, RandomSource, Series, validate

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "MarketState",
    "Series",
    "RandomSource",
    "validate",
    "__version__",
]
