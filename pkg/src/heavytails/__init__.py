"""heavytails: heavy-tailed observables of stochastic dynamical models.

Simulators and matching analytic oracles for a family of models whose
observables develop power-law tails: a multiplicative-noise recursion,
preference-weighted random graphs, threshold-intermittency episodes,
deadline-scheduled queues with an age-structured transport limit, and
sandpile cellular automata with finite-size-scaling analysis.
"""

__version__ = "0.1.0"

from . import backend  # noqa: F401  (selects the kernel backend at import)
from .errors import HeavyTailsError  # noqa: F401
