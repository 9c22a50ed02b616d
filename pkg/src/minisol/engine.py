"""End-to-end pipeline: parse -> lower -> graph -> explore -> concretize ->
replay-verify.  This is the library entry point the CLI and the tests use.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from . import concretize as conc
from . import oracle
from .cfg import build_cfg_plus
from .encoder import SolverConfig, SolverSession, encode, ssa_number
from .errors import ConfigError, MiniSolError, TargetError
from .explorer import (HEURISTICS, Limits, build_context,
                       find_minimal_satisfiable_walk)
from .frontend import extract_targets, parse_contract
from .ir import inline_internal_calls, lower


@dataclass
class EngineResult:
    status: str                      # 'found' | 'notfound'
    sequence: Optional[conc.TransactionSequence] = None
    report: Optional[oracle.ReplayReport] = None
    walk: Optional[object] = None
    walks_explored: int = 0
    reason: str = ""
    time_ms: int = 0
    target: Optional[object] = None


def prepare(source):
    """Parse and lower a contract; returns (ast, inlined program, graph)."""
    ast = parse_contract(source)
    program = inline_internal_calls(lower(ast))
    graph = build_cfg_plus(program)
    return ast, program, graph


def pick_target(source, target_line=None):
    targets = extract_targets(source)
    if not targets:
        raise TargetError("no @target annotation in the input")
    if target_line is None:
        if len(targets) > 1:
            raise TargetError("multiple @target annotations; select one "
                              "with --target-line")
        return targets[0]
    for spec in targets:
        if spec.line == target_line:
            return spec
    raise TargetError("no @target annotation on line %d" % target_line)


def synthesize(source, *, target=None, target_line=None,
               heuristic="floyd-warshall", solver: SolverConfig = None,
               limits: Limits = None, lazy_check=False,
               replay_check=True) -> EngineResult:
    """Find a transaction sequence reaching the (annotated) target line.

    With `replay_check` (the default) a found sequence must be confirmed by
    concrete replay before it is returned; a diverging sequence raises.
    """
    t0 = time.monotonic()
    if target is None:
        target = pick_target(source, target_line)
    ast, program, graph = prepare(source)
    limits = limits or Limits()
    if heuristic not in HEURISTICS:
        raise ConfigError("unknown heuristic %r (have: %s)"
                          % (heuristic, ", ".join(sorted(HEURISTICS))))
    factory = HEURISTICS[heuristic]
    session = SolverSession(solver)
    context = build_context(graph, target.safety)

    def check(walk):
        script = ssa_number(walk, program)
        smt_script = encode(script, safety=target.safety, program=program)
        return session.check(smt_script)

    result = find_minimal_satisfiable_walk(
        graph, target, factory, limits, check=check, context=context,
        lazy_check=lazy_check)
    elapsed_ms = int((time.monotonic() - t0) * 1000)

    if result.status != "found":
        return EngineResult("notfound", walks_explored=result.walks_explored,
                            reason=result.reason, time_ms=elapsed_ms,
                            target=target)

    seq = conc.concretize(result.model, result.walk, program,
                          target_line=target.line,
                          safety_text=target.safety_text,
                          heuristic=heuristic,
                          walks_explored=result.walks_explored,
                          time_ms=elapsed_ms)
    report = oracle.replay(program, seq, target)
    if replay_check:
        if not report.target_hit or not report.safety_value:
            raise MiniSolError(
                "replay verification failed: solver model does not drive "
                "execution to line %d (hit=%s safety=%s)"
                % (target.line, report.target_hit, report.safety_value))
    return EngineResult("found", sequence=seq, report=report,
                        walk=result.walk,
                        walks_explored=result.walks_explored,
                        time_ms=elapsed_ms, target=target)


def replay_file(source, seq_json_text):
    """Replay a JSON transaction sequence against a contract; the target is
    the file's annotation (first one if several)."""
    targets = extract_targets(source)
    target = targets[0] if targets else None
    _ast, program, _graph = prepare(source)
    seq = conc.from_json(seq_json_text)
    return oracle.replay(program, seq, target)
