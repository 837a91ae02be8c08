"""Effective impedance of a periodic layer of plasmonic nanoparticles on a plate."""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
