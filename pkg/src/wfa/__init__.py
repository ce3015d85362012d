"""Wavelet-based testing of equal treatment mean curves in functional data."""

__version__ = "0.1.0"
