"""Integer points on quadric surfaces cut by irrational linear conditions."""

__version__ = "0.1.0"

from .errors import BudgetExceeded, QuadsurfError  # noqa: E402
from .field import QuadScalar  # noqa: E402
from .forms import (LinearMap, QuadraticForm, Regime, canonicalize_pair,  # noqa: E402
                    classify_pair)
from .pairio import load_pair, parse_pair  # noqa: E402

__all__ = ["__version__", "BudgetExceeded", "QuadsurfError", "QuadScalar", "LinearMap",
           "QuadraticForm", "Regime", "canonicalize_pair", "classify_pair", "load_pair",
           "parse_pair"]
