"""Differential testing harness for interactive HDL debuggers.

Parses a Verilog subset, simulates it under a reference interactive
debugger, applies equivalence-preserving transformations to designs and
to debug-action sequences, and compares normalized debug traces to flag
debugger bugs.
"""

__version__ = "0.1.0"

from .parser import ParseError, parse
from .source import SourceUnit, render
from .sim import ElaborationError, SimConfig
from .debugger import start_session
from .faults import FAULTS, FaultConfig

__all__ = [
    "ParseError",
    "parse",
    "SourceUnit",
    "render",
    "ElaborationError",
    "SimConfig",
    "start_session",
    "FAULTS",
    "FaultConfig",
    "__version__",
]
