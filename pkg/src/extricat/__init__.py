"""Desk-scale certificates for finite k-linear extriangulated categories."""

__version__ = "0.1.0"
