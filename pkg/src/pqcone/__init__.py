"""Cone localization of positive solutions for coupled (p,q)-Laplacian systems."""

__version__ = "0.1.0"
