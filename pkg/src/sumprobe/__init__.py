"""Demographically controlled inputs and bias scores for news summarizers."""

__version__ = "0.1.0"
