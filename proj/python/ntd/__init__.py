"""Task decomposition of sigmoid feedforward networks.

Trains small sigmoid networks with L1 sparsification, scores every hidden
unit by its input-effect/output-effect vector, and factorizes the resulting
non-negative matrix into principal tasks and cross-layer unit communities.
"""

from ._ntd import *  # noqa: F401,F403
from ._ntd import __version__  # noqa: F401
