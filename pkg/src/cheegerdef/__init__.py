"""Cheeger deformations of invariant metrics on catalogued group actions.

Builds the deformed, vertically rescaled and limit metrics attached to an
isometric group action, and verifies their convergence rates, totally
geodesic orbit fibers and normal homogeneous pullback identity at
configurable numerical scale.
"""

from . import cheeger, gmanifold, lie_core, scenarios, tensor_calc, verify
from ._jit import HAVE_NUMBA, JIT_ENABLED

__version__ = "0.1.0"

__all__ = [
    "HAVE_NUMBA",
    "JIT_ENABLED",
    "__version__",
    "cheeger",
    "gmanifold",
    "lie_core",
    "scenarios",
    "tensor_calc",
    "verify",
]
