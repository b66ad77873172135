"""Numerical toolkit for quantum diffusion in the lattice Anderson model."""
from importlib import metadata as _metadata

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:  # pragma: no cover - source checkout without install
    __version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
