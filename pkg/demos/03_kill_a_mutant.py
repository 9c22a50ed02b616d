"""Walkthrough: generating test data that kills a surviving mutant.

A mutant flips `assert(a > b)` into `assert(a >= b)`.  Only a == b tells
the two programs apart, so the kill query conjoins reaching the assert
with the exclusive-or of both conditions.  The engine solves it, and a
differential replay of the resulting transactions shows the divergence:
the original reverts, the mutant sails through.
"""

import pathlib

from minisol.mutation import MutantSpec, run_mutants

source = (pathlib.Path(__file__).resolve().parent.parent
          / "corpus" / "mutant_kill.msol").read_text()
print(source)

spec = MutantSpec("condition", 5, "a > b", "a >= b")
outcome = run_mutants(source, [spec])[0]
print("mutant:   ", spec.original, "->", spec.mutated)
print("status:   ", outcome.status)
print("kill:     ", "strong" if outcome.kill.strong else "weak",
      "-", outcome.kill.detail)
duel = outcome.sequence.transactions[1]
print("test data: duel(a=%d, b=%d)  (equal, as only a == b can tell)"
      % (duel.args[0], duel.args[1]))

# equivalent mutants stay alive: the infection condition is unsatisfiable
same = run_mutants(source, [MutantSpec("condition", 5, "a > b", "a > b")])[0]
print("equivalent mutant:", same.status)
