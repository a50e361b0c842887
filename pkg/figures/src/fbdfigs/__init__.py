"""Figure rendering for serialized lattice diffusion artifacts."""

from .render import FigureSpec, render, KINDS
from .schemas import SchemaError

__version__ = "0.1.0"
