"""Spin squeezing in a two-component condensate: one-axis twisting, sector GPE, loss."""

__version__ = "0.1.0"
