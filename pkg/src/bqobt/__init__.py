"""Balanced truncation for bilinear systems with quadratic outputs."""

__version__ = "0.1.0"

from .model import BqoSystem, StabilityCertificate, build, existence_margins, scale_input, stability_params  # noqa: E402,F401
from .gramians import GramianSet, compute_gramians  # noqa: E402,F401
from .reduction import BalancingResult, balanced_truncation, reduce_with  # noqa: E402,F401
