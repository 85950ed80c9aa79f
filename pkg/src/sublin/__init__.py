"""Sub-linear expectations on finite generator sets: envelopes, capacities,
Choquet integrals, LIL moment functionals, adversarial recursions and
Monte Carlo checks of maxima of partial sums and moving averages."""

from .measures import Discrete, GeneratorSet, Normal, Pareto, QuantileDefined, SurvivalDefined

__all__ = ["Discrete", "GeneratorSet", "Normal", "Pareto", "QuantileDefined", "SurvivalDefined"]
__version__ = "0.1.0"
