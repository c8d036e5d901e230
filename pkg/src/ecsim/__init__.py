"""Synchronous distributed edge-coloring simulator and algorithm library."""
__version__ = "0.1.0"
