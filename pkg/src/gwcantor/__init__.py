"""Random closed subsets of Cantor space from Galton-Watson trees.

Exact finite-depth laws, reproducible samplers, the overlay map, test
machinery for randomness notions and energy/dimension analytics.
"""

from .params import SurvivalParams, extinction_probability, extinction_recursion
from .sampling import SampleConfig

__all__ = ["SampleConfig", "SurvivalParams", "extinction_probability", "extinction_recursion"]
__version__ = "0.1.0"
