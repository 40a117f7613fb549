"""Causal stream functions, coinduction, and the 2-adic Collatz conjugacy."""
from .streams import *  # noqa: F401,F403
from .causality import *  # noqa: F401,F403
from .woven import *  # noqa: F401,F403
from .coalgebra import *  # noqa: F401,F403
from .dyadic import *  # noqa: F401,F403
from .collatz import *  # noqa: F401,F403
from .specfile import *  # noqa: F401,F403

__version__ = "0.1.0"
