"""Symmetric convex bodies on tensor products of finite-dimensional real spaces."""

__version__ = "0.1.0"
