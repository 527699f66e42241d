"""Lexing, parsing and validation of the pragma-annotated behavioral DSL."""

from .ast import (
    BehaviorProgram, FunctionDef, Param, Pos, Pragma, SignalType, Signature, literal_width, wrap,
)
from .parser import parse, parse_functions
from .pragmas import extract_pragmas
from .printer import pretty

__all__ = [
    "BehaviorProgram", "FunctionDef", "Param", "Pos", "Pragma", "SignalType", "Signature",
    "extract_pragmas", "literal_width", "parse", "parse_functions", "pretty", "wrap",
]
