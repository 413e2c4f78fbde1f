"""Ordinal register machines, run certificates and their finite-time verifier."""
from .ordinal import Ordinal, parse_ordinal, format_ordinal
from .assembler import assemble
from .machine import run

__version__ = "0.1.0"

__all__ = ["Ordinal", "parse_ordinal", "format_ordinal", "assemble", "run", "__version__"]
