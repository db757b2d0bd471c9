"""Worst-case efficiency analysis of timed asynchronous processes."""

__version__ = "0.1.0"
