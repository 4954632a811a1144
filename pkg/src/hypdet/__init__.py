"""Regularized determinants of hyperbolic Laplacians from length spectra."""

__version__ = "0.1.0"
