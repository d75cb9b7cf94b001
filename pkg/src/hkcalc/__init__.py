"""Exact computation of h-functions, addition kernels and Hilbert-Kunz data."""

__version__ = "0.1.0"

from .compose import HFunction, ehk, fsig, threshold  # noqa: E402
from .exactnum import PiecewisePoly, Poly, fmt_q, parse_rational  # noqa: E402
from .kernels import dinf_eval, dp_eval, syzygy_gap  # noqa: E402

__all__ = ["HFunction", "PiecewisePoly", "Poly", "__version__", "dinf_eval", "dp_eval", "ehk", "fmt_q",
           "fsig", "parse_rational", "syzygy_gap", "threshold"]
