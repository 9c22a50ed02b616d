"""Targeted backward symbolic execution for MiniSol contracts.

Given a contract, a ``// @target`` annotated line and an optional safety
condition, the engine searches the reversed multi-transaction flow graph
for a satisfiable walk, solves its constraints, and emits a concrete
deployment-plus-calls sequence that a built-in interpreter re-verifies.
"""

from .engine import EngineResult, prepare, synthesize
from .errors import MiniSolError
from .explorer import HEURISTICS, Limits, register_heuristic
from .encoder import SolverConfig

__all__ = ["EngineResult", "HEURISTICS", "Limits", "MiniSolError",
           "SolverConfig", "prepare", "register_heuristic", "synthesize"]

__version__ = "0.1.0"
