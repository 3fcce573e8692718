"""Exact and numerical tools for invariant forms, Lie algebra cocycles and their periods."""

__version__ = "0.1.0"

from .errors import LieperError
from .lie import LieAlgebra, LinearMap, SymBilinearForm, killing_form, load_algebra

__all__ = ["LieAlgebra", "LieperError", "LinearMap", "SymBilinearForm", "__version__",
           "killing_form", "load_algebra"]
