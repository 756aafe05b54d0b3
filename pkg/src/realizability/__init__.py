"""Executable classical realizability over a combinator machine with quote.

Submodules cover compilation, proof checking, truth values and threads."""

from .terms import (
    B, C, CC, E, I, K, QT, W, App, Comb, Const, Cont, Num, Process, Push, Stack, Term,
    decode, encode, format_process, format_stack, format_term, numeral,
    parse_process, parse_stack, parse_term, sigma,
)
from .machine import BudgetExhausted, Cyclic, RunReport, Stuck, reduces_to, run, step
from .compiler import abstract, compile_lambda, parse_lambda, theorem_1_1_check, to_term

__version__ = "0.1.0"

__all__ = [
    "B", "C", "CC", "E", "I", "K", "QT", "W", "App", "Comb", "Const", "Cont", "Num",
    "Process", "Push", "Stack", "Term", "decode", "encode", "format_process", "format_stack",
    "format_term", "numeral", "parse_process", "parse_stack", "parse_term", "sigma",
    "BudgetExhausted", "Cyclic", "RunReport", "Stuck", "reduces_to", "run", "step",
    "abstract", "compile_lambda", "parse_lambda", "theorem_1_1_check", "to_term",
]
