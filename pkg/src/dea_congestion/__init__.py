"""Congestion analysis in data envelopment analysis, including directional congestion."""

__version__ = "0.1.0"
