"""Satisfiability toolkit for bundled fragments of first-order modal logic."""

from .formula import (
    BOT,
    TOP,
    And,
    Atom,
    Bot,
    Bundle,
    CaptureError,
    Formula,
    Fragment,
    Kind,
    NegAtom,
    Not,
    Or,
    Top,
    classify,
    free_vars,
    is_clean,
    is_pnf,
    make_clean,
    modal_depth,
    substitute,
    to_pnf,
)
from .kripke import DomainPolicy, KripkeModel, evaluate, validate
from .oracle import bounded_sat, enumerate_models
from .syntax import ParseError, parse, render
from .tableau import FragmentError, SatResult, solve

__all__ = [
    "BOT", "TOP", "And", "Atom", "Bot", "Bundle", "CaptureError", "DomainPolicy",
    "Formula", "Fragment", "FragmentError", "Kind", "KripkeModel", "NegAtom", "Not",
    "Or", "ParseError", "SatResult", "Top", "bounded_sat", "classify",
    "enumerate_models", "evaluate", "free_vars", "is_clean", "is_pnf", "make_clean",
    "modal_depth", "parse", "render", "solve", "substitute", "to_pnf", "validate",
]
