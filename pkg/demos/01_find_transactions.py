"""Walkthrough: from an annotated contract to a verified transaction list.

The guess-and-check contract stores guesses in a mapping; the annotated
line is only reachable after someone wrote value 1 at key 10.  The engine
works backward from that line, so it discovers the required guess(10, 1)
call without ever enumerating inputs.
"""

import pathlib

from minisol import synthesize
from minisol.concretize import to_json

source = (pathlib.Path(__file__).resolve().parent.parent
          / "corpus" / "guess_check.msol").read_text()
print(source)

result = synthesize(source)
print("status:        ", result.status)
print("walks explored:", result.walks_explored)
print("replay hit:    ", result.report.target_hit,
      "at transaction", result.report.hit_at_tx)
print()
print(to_json(result.sequence))
