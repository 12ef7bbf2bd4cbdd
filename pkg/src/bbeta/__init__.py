"""Bimodal beta distribution, regression and diagnostics."""

from .distribution import BBetaParams

__version__ = "0.1.0"

__all__ = ["BBetaParams", "__version__"]
