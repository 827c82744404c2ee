"""Dynamic geometric set cover engine."""

__version__ = "0.1.0"
