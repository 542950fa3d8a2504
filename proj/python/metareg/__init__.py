"""Adaptive per-coordinate learning rates from regularized max-min updates.

Thin re-export of the compiled core: divergence generators, rate solvers,
test problems, the meta-regularization driver with its baselines, and the
regret/bound evaluators.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
