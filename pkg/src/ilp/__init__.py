"""Proof search, cut elimination, interpolation and countermodels for IL-(P)."""

from ilp.syntax import (
    And, Bot, Box, BoxK, Formula, Imp, Neg, Or, Rhd, Var,
    parse, parse_bimodal, show,
)

__all__ = [
    "And", "Bot", "Box", "BoxK", "Formula", "Imp", "Neg", "Or", "Rhd", "Var",
    "parse", "parse_bimodal", "show",
]

__version__ = "0.1.0"
