"""Lustre-subset contract frontend."""
from .ast import Program
from .elaborate import CheckedContract, elaborate, load
from .parser import Diagnostic, LustreError, ParseError, parse_expr, parse_program
from .printer import print_program

__all__ = ["Program", "CheckedContract", "elaborate", "load", "Diagnostic",
           "LustreError", "ParseError", "parse_expr", "parse_program", "print_program"]
