"""Proof-guided fastest-program search on a step-metered counter machine."""

from .vm import KERNEL

__version__ = "0.1.0"
__all__ = ["KERNEL", "__version__"]
