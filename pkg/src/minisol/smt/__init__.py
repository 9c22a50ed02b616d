"""Bundled SMT solver for the bitvector + uninterpreted-function fragment
the encoder emits.  Usable in process via :func:`solve_text` or as a
standalone SMT-LIB 2 process via ``python -m minisol.smt``."""

from .solve import SmtInternalError, SmtUnknown, solve_text
from .parse import SmtParseError
from .terms import SmtError

__all__ = ["solve_text", "SmtError", "SmtParseError", "SmtUnknown",
           "SmtInternalError"]
