"""Solving pipeline: map axioms -> ground rewrite -> word-level reduction ->
bit-blasting -> CDCL -> model.

Mappings and arrays arrive as unary uninterpreted functions whose updates
are described by quantified frame axioms; those two axiom shapes (point
update with all-other-keys preservation, and constant initialization) are
compiled into ite chains over fresh cell variables.  Remaining free base
functions are Ackermann-expanded over the argument terms that actually
occur.  Every model is checked against the rewritten assertions before it
is reported.
"""

from __future__ import annotations

import time

from .bitblast import Blaster
from .parse import parse_script
from .sat import SatBudgetExceeded, SatSolver
from .terms import BOOL, BV_BINOPS, BV_CMPS, BV_UNOPS, SmtError, \
    is_const, print_term


class SmtUnknown(SmtError):
    """Raised when the script falls outside the supported fragment."""


class SmtInternalError(SmtError):
    """A produced model failed the final self-check; always a solver bug."""


# ---------------------------------------------------------------------------
# Constant folding
# ---------------------------------------------------------------------------

def _mask(width):
    return (1 << width) - 1


def fold(ctx, term, memo):
    hit = memo.get(id(term))
    if hit is not None:
        return hit
    out = _fold(ctx, term, memo)
    memo[id(term)] = out
    return out


def _fold(ctx, term, memo):
    op = term.op
    if op in ("const", "cbool", "var"):
        return term
    if op == "forall":
        return ctx.node("forall", term.val,
                        (fold(ctx, term.args[0], memo),))
    args = tuple(fold(ctx, a, memo) for a in term.args)
    if op == "app":
        return ctx.node("app", term.val, args, term.sort)

    if op == "not":
        a = args[0]
        if a.op == "cbool":
            return ctx.cbool(not a.val)
        if a.op == "not":
            return a.args[0]
        return ctx.mk("not", a)
    if op in ("and", "or"):
        keep = []
        absorb = ctx.FALSE if op == "and" else ctx.TRUE
        for a in args:
            if a is absorb:
                return absorb
            if a.op == "cbool":
                continue
            keep.append(a)
        if not keep:
            return ctx.TRUE if op == "and" else ctx.FALSE
        if len(keep) == 1:
            return keep[0]
        return ctx.mk(op, *keep)
    if op == "xor":
        const = False
        keep = []
        for a in args:
            if a.op == "cbool":
                const ^= a.val
            else:
                keep.append(a)
        if not keep:
            return ctx.cbool(const)
        result = keep[0] if len(keep) == 1 else ctx.mk("xor", *keep)
        return ctx.mk("not", result) if const else result
    if op == "=>":
        return _fold(ctx, ctx.mk("or", ctx.mk("not", args[0]), args[1]), memo)
    if op == "=":
        a, b = args
        if a is b:
            return ctx.TRUE
        if is_const(a) and is_const(b):
            return ctx.cbool(a.val == b.val)
        if a.sort == BOOL:
            if a.op == "cbool":
                return b if a.val else _fold(ctx, ctx.mk("not", b), memo)
            if b.op == "cbool":
                return a if b.val else _fold(ctx, ctx.mk("not", a), memo)
        distributed = _distribute_cmp(ctx, "=", a, b, memo)
        if distributed is not None:
            return distributed
        return ctx.mk("=", a, b)
    if op == "distinct":
        a, b = args
        if a is b:
            return ctx.FALSE
        if is_const(a) and is_const(b):
            return ctx.cbool(a.val != b.val)
        return ctx.mk("distinct", a, b)
    if op == "ite":
        c, t, e = args
        if c.op == "cbool":
            return t if c.val else e
        if t is e:
            return t
        if t.sort == BOOL:
            if t.op == "cbool" and e.op == "cbool":
                return c if t.val else _fold(ctx, ctx.mk("not", c), memo)
            if t.op == "cbool":
                rule = ctx.mk("or", c, e) if t.val \
                    else ctx.mk("and", ctx.mk("not", c), e)
                return _fold(ctx, rule, memo)
            if e.op == "cbool":
                rule = ctx.mk("or", ctx.mk("not", c), t) if e.val \
                    else ctx.mk("and", c, t)
                return _fold(ctx, rule, memo)
        return ctx.mk("ite", c, t, e)

    if op in BV_BINOPS:
        a, b = args
        width = a.sort[1]
        if a.op == "const" and b.op == "const":
            return ctx.const(_bv_arith(op, a.val[0], b.val[0], width), width)
        if b.op == "const" and b.val[0] == 0:
            if op in ("bvadd", "bvsub", "bvor", "bvxor", "bvshl", "bvlshr"):
                return a
            if op in ("bvmul", "bvand"):
                return ctx.const(0, width)
        if a.op == "const" and a.val[0] == 0:
            if op in ("bvadd", "bvor", "bvxor"):
                return b
            if op in ("bvmul", "bvand"):
                return ctx.const(0, width)
        if b.op == "const" and b.val[0] == 1 and op in ("bvmul", "bvudiv"):
            return a
        if a.op == "const" and a.val[0] == 1 and op == "bvmul":
            return b
        return ctx.mk(op, a, b)
    if op in BV_UNOPS:
        a = args[0]
        width = a.sort[1]
        if a.op == "const":
            v = a.val[0]
            return ctx.const(~v if op == "bvnot" else -v, width)
        return ctx.mk(op, a)
    if op in BV_CMPS:
        a, b = args
        if a.op == "const" and b.op == "const":
            x, y = a.val[0], b.val[0]
            return ctx.cbool({"bvult": x < y, "bvule": x <= y,
                              "bvugt": x > y, "bvuge": x >= y}[op])
        distributed = _distribute_cmp(ctx, op, a, b, memo)
        if distributed is not None:
            return distributed
        return ctx.mk(op, a, b)
    if op == "zero_extend":
        a = args[0]
        if term.val == 0:
            return a
        if a.op == "const":
            return ctx.const(a.val[0], a.sort[1] + term.val)
        return ctx.mk(op, a, val=term.val)
    if op == "sign_extend":
        a = args[0]
        if term.val == 0:
            return a
        if a.op == "const":
            v, w = a.val
            if v >> (w - 1):
                v |= _mask(term.val) << w
            return ctx.const(v, w + term.val)
        return ctx.mk(op, a, val=term.val)
    if op == "extract":
        hi, lo = term.val
        a = args[0]
        if a.op == "const":
            return ctx.const(a.val[0] >> lo, hi - lo + 1)
        if lo == 0 and hi == a.sort[1] - 1:
            return a
        return ctx.mk(op, a, val=term.val)
    if op == "concat":
        a, b = args
        if a.op == "const" and b.op == "const":
            return ctx.const((a.val[0] << b.sort[1]) | b.val[0],
                             a.sort[1] + b.sort[1])
        return ctx.mk(op, a, b)
    raise SmtError("cannot fold %r" % op)


def _distribute_cmp(ctx, op, a, b, memo):
    """Push a comparison against a constant through an ite so map-read
    chains fold into boolean structure over their conditions; None when
    the rule does not apply."""
    for ite_side, other, left in ((a, b, True), (b, a, False)):
        if ite_side.op != "ite" or other.op != "const":
            continue
        _c, t, e = ite_side.args
        if not (is_const(t) and is_const(e)):
            continue
        args_t = (t, other) if left else (other, t)
        args_e = (e, other) if left else (other, e)
        return _fold(ctx, ctx.mk("ite", ite_side.args[0],
                                 _fold(ctx, ctx.mk(op, *args_t), memo),
                                 _fold(ctx, ctx.mk(op, *args_e), memo)),
                     memo)
    return None


def _bv_arith(op, x, y, width):
    if op == "bvadd":
        return x + y
    if op == "bvsub":
        return x - y
    if op == "bvmul":
        return x * y
    if op == "bvudiv":
        return x // y if y else _mask(width)
    if op == "bvurem":
        return x % y if y else x
    if op == "bvand":
        return x & y
    if op == "bvor":
        return x | y
    if op == "bvxor":
        return x ^ y
    if op == "bvshl":
        return x << y if y < width else 0
    if op == "bvlshr":
        return x >> y if y < width else 0
    raise SmtError(op)


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def rewrite(ctx, term, subst, memo):
    """Substitute bound variables (through chains) and fold, bottom up."""
    hit = memo.get(id(term))
    if hit is not None:
        return hit
    if term.op == "var":
        value = subst.get(term)
        out = term if value is None else rewrite(ctx, value, subst, memo)
    elif term.op in ("const", "cbool"):
        out = term
    elif term.op == "app":
        out = ctx.node("app", term.val,
                       (rewrite(ctx, term.args[0], subst, memo),), term.sort)
    elif term.op == "forall":
        out = ctx.node("forall", term.val,
                       (rewrite(ctx, term.args[0], subst, memo),))
    else:
        args = tuple(rewrite(ctx, a, subst, memo) for a in term.args)
        out = _fold(ctx, ctx.node(term.op, term.val, args, term.sort), {})
    memo[id(term)] = out
    return out


def occurs(var, term):
    if term is var:
        return True
    return any(occurs(var, a) for a in term.args)


# ---------------------------------------------------------------------------
# Map (uninterpreted function) handling
# ---------------------------------------------------------------------------

class _Maps:
    def __init__(self, ctx):
        self.ctx = ctx
        self.defs = {}             # fname -> ('store', base, idx) | ('const', t)
        self.cells = {}            # fname -> cell var term
        self.apps = {}             # base fname -> {arg term -> ack var term}
        self.ret_sorts = {}

    def match_forall(self, term, funs):
        """Recognize the two supported axiom shapes; returns True if consumed."""
        name, _sort = term.val
        ctx = self.ctx
        bvar = ctx.var(name, _sort)
        body = term.args[0]

        def is_app_of(t):
            return t.op == "app" and t.args[0] is bvar and t.val in funs

        # (= (f k) <k-free term>)
        if body.op == "=":
            a, b = body.args
            if is_app_of(a) and not occurs(bvar, b):
                self.defs[a.val] = ("const", b)
                return True
            if is_app_of(b) and not occurs(bvar, a):
                self.defs[b.val] = ("const", a)
                return True
        # (=> (distinct k idx) (= (f k) (g k)))
        if body.op in ("=>", "or"):
            if body.op == "=>":
                guard, eq = body.args
            else:
                guard, eq = ctx.mk("not", body.args[0]), body.args[1]
                guard = fold(ctx, guard, {})
            cond = None
            if guard.op == "distinct":
                cond = guard.args
            elif guard.op == "not" and guard.args[0].op == "=":
                cond = guard.args[0].args
            if cond is not None and eq.op == "=":
                sides = cond
                idx = None
                if sides[0] is bvar and not occurs(bvar, sides[1]):
                    idx = sides[1]
                elif sides[1] is bvar and not occurs(bvar, sides[0]):
                    idx = sides[0]
                a, b = eq.args
                if idx is not None and is_app_of(a) and is_app_of(b) \
                        and a.val != b.val:
                    self.defs[a.val] = ("store", b.val, idx)
                    return True
        return False

    def cell(self, fname, ret_sort):
        if fname not in self.cells:
            self.cells[fname] = self.ctx.var("%%cell!%s" % fname, ret_sort)
        return self.cells[fname]

    def resolve(self, fname, arg, ret_sort, depth=0):
        if depth > len(self.defs) + 1:
            raise SmtUnknown("cyclic map definition for %r" % fname)
        ctx = self.ctx
        d = self.defs.get(fname)
        if d is None:
            table = self.apps.setdefault(fname, {})
            if arg not in table:
                table[arg] = ctx.var("%%ack!%s!%d" % (fname, len(table)),
                                     ret_sort)
                self.ret_sorts[fname] = ret_sort
            return table[arg]
        if d[0] == "const":
            return d[1]
        base, idx = d[1], d[2]
        hit = fold(ctx, ctx.mk("=", arg, idx), {})
        below = self.resolve(base, arg, ret_sort, depth + 1)
        cell = self.cell(fname, ret_sort)
        if hit.op == "cbool":
            return cell if hit.val else below
        return fold(ctx, ctx.mk("ite", hit, cell, below), {})

    def congruence_assertions(self):
        out = []
        ctx = self.ctx
        for fname, table in self.apps.items():
            items = list(table.items())
            for i in range(len(items)):
                for j in range(i + 1, len(items)):
                    (a1, v1), (a2, v2) = items[i], items[j]
                    out.append(ctx.mk("or", ctx.mk("distinct", a1, a2),
                                      ctx.mk("=", v1, v2)))
        return out


# ---------------------------------------------------------------------------
# Problem pipeline
# ---------------------------------------------------------------------------

class Result:
    def __init__(self, status, values=None, reason=""):
        self.status = status       # 'sat' | 'unsat' | 'unknown'
        self.values = values or []  # (query text, value term text)
        self.reason = reason


def solve_commands(ctx, script, conflict_budget=None):
    maps = _Maps(ctx)
    ground = []
    for a in script.asserts:
        a = fold(ctx, a, {})
        if a.op == "forall":
            if not maps.match_forall(a, script.funs):
                raise SmtUnknown("unsupported quantified assertion %s"
                                 % print_term(a))
        elif a.op == "cbool":
            if not a.val:
                return Result("unsat")
        else:
            ground.append(a)

    demoted = {}                   # app term -> resolved term

    def demote(term, memo):
        hit = memo.get(id(term))
        if hit is not None:
            return hit
        if term.op == "app":
            arg = demote(term.args[0], memo)
            out = maps.resolve(term.val, arg, term.sort)
        elif term.op == "forall":
            raise SmtUnknown("nested quantifier")
        elif term.args:
            args = tuple(demote(a, memo) for a in term.args)
            out = fold(ctx, ctx.node(term.op, term.val, args, term.sort), {})
        else:
            out = term
        memo[id(term)] = out
        return out

    rewritten = [demote(a, demoted) for a in ground]
    rewritten += [fold(ctx, a, {}) for a in maps.congruence_assertions()]
    queries = [demote(fold(ctx, q, {}), demoted) for q in script.queries]

    checked = [a for a in rewritten if a.op != "cbool" or not a.val]
    if any(a.op == "cbool" and not a.val for a in checked):
        return Result("unsat")

    # word-level reduction: propagate single definitions
    residual = checked
    subst = {}
    bindings = []
    while True:
        new_binds = 0
        keep = []
        memo = {}
        for a in residual:
            a2 = rewrite(ctx, a, subst, memo)
            if a2.op == "cbool":
                if not a2.val:
                    return Result("unsat")
                continue
            bind = _match_binding(ctx, a2, subst)
            if bind is not None:
                var, value = bind
                subst[var] = value
                bindings.append((var, value))
                new_binds += 1
                memo = {}
                continue
            keep.append(a2)
        residual = keep
        if not new_binds:
            break

    # cheap word-level model search first; bit-blast only when it fails
    model_env = {}
    if residual:
        model_env = _greedy_model(residual)
        if model_env is None:
            model_env = {}
            blaster = Blaster()
            for a in residual:
                blaster.assert_term(a)
            solver = SatSolver(blaster.cnf.nvars)
            for clause in blaster.cnf.clauses:
                solver.add_clause(clause)
            try:
                assignment = solver.solve(conflict_budget)
            except SatBudgetExceeded:
                return Result("unknown", reason="conflict budget exceeded")
            if assignment is None:
                return Result("unsat")
            for name, lits in blaster.var_bits.items():
                if isinstance(lits, tuple):
                    model_env[name] = sum(1 << i for i, lit in enumerate(lits)
                                          if _lit_value(assignment, lit))
                else:
                    model_env[name] = _lit_value(assignment, lits)

    evaluator = _Evaluator(ctx, model_env, subst)
    for a in rewritten:
        if evaluator.eval(a) is not True:
            raise SmtInternalError("model fails %s" % print_term(a))

    values = []
    for text, q in zip(script.query_texts, queries):
        v = evaluator.eval(q)
        if isinstance(v, bool):
            values.append((text, "true" if v else "false"))
        else:
            values.append((text, "(_ bv%d %d)" % (v, q.sort[1])))
    return Result("sat", values)


def _lit_value(assignment, lit):
    if lit == 1:
        return True
    if lit == -1:
        return False
    v = assignment[abs(lit)]
    return v if lit > 0 else not v


# ---------------------------------------------------------------------------
# Greedy word-level model search
# ---------------------------------------------------------------------------

def _eval_plain(term, env):
    """Evaluate a ground term under a total env (missing vars are 0)."""
    return _Evaluator(None, env, {}).eval(term)


def _collect_vars(term, out, seen):
    if id(term) in seen:
        return
    seen.add(id(term))
    if term.op == "var":
        out.setdefault(term.val, term.sort)
    for a in term.args:
        _collect_vars(a, out, seen)


def _set_var(env, term, value):
    if term.op != "var":
        return False
    if term.sort == BOOL:
        env[term.val] = bool(value)
    else:
        width = term.sort[1]
        if value < 0 or value > _mask(width):
            return False
        env[term.val] = value
    return True


_CMP_NEG = {"bvult": "bvuge", "bvule": "bvugt", "bvugt": "bvule",
            "bvuge": "bvult"}


def _force(term, want, env, depth=0):
    """Best effort at making a boolean term evaluate to `want` by assigning
    variables; every candidate model is re-verified afterwards."""
    if depth > 12:
        return False
    op = term.op
    if op == "cbool":
        return term.val == want
    if op == "var":
        return _set_var(env, term, want)
    if op == "not":
        return _force(term.args[0], not want, env, depth + 1)
    if (op == "and" and want) or (op == "or" and not want):
        for sub in term.args:
            if _eval_plain(sub, env) != want:
                if not _force(sub, want, env, depth + 1):
                    return False
        return True
    if (op == "or" and want) or (op == "and" and not want):
        return any(_force(sub, want, env, depth + 1) for sub in term.args)
    if op == "=>":
        if want:
            return (_force(term.args[0], False, env, depth + 1)
                    or _force(term.args[1], True, env, depth + 1))
        return (_force(term.args[0], True, env, depth + 1)
                and _force(term.args[1], False, env, depth + 1))
    if op in ("=", "distinct"):
        equal = (op == "=") == want
        return _force_eq(term.args[0], term.args[1], equal, env, depth)
    if op in BV_CMPS:
        cmp_op = op if want else _CMP_NEG[op]
        return _force_cmp(term.args[0], term.args[1], cmp_op, env, depth)
    return False


def _solve_to_value(term, value, env, depth=0):
    """Assign variables so that `term` evaluates to `value`, inverting
    ite/add/sub/extend chains one free side at a time."""
    if depth > 16:
        return False
    op = term.op
    if op == "var":
        return _set_var(env, term, value)
    if op == "const":
        return term.val[0] == value
    if op == "cbool":
        return term.val == value
    if op == "zero_extend":
        inner = term.args[0]
        if value > _mask(inner.sort[1]):
            return False
        return _solve_to_value(inner, value, env, depth + 1)
    if op == "ite":
        cond, then, els = term.args
        for pick, sub in ((True, then), (False, els)):
            if _eval_plain(sub, env) == value or _solvable_leaf(sub):
                if _solve_to_value(sub, value, env, depth + 1) \
                        and _force(cond, pick, env, depth + 1):
                    return True
        return False
    if op in ("bvadd", "bvsub"):
        width = term.sort[1]
        a, b = term.args
        for free, fixed, left in ((a, b, True), (b, a, False)):
            fixed_val = _eval_plain(fixed, env)
            if op == "bvadd":
                want = (value - fixed_val) & _mask(width)
            elif left:                       # solve a in a - b = value
                want = (value + fixed_val) & _mask(width)
            else:                            # solve b in a - b = value
                want = (fixed_val - value) & _mask(width)
            if _solve_to_value(free, want, env, depth + 1):
                return True
        return False
    return _eval_plain(term, env) == value


def _solvable_leaf(term):
    while term.op in ("zero_extend", "bvadd", "bvsub"):
        term = term.args[0]
    return term.op in ("var", "ite")


def _force_eq(x, y, equal, env, depth):
    for side, other in ((x, y), (y, x)):
        value = _eval_plain(other, env)
        if not equal:
            if other.sort == BOOL:
                value = not value
            else:
                value = (value ^ 1) & _mask(side.sort[1])
        if _solve_to_value(side, value, env, depth + 1):
            return True
    return False


_CMP_HOLDS = {"bvult": lambda a, b: a < b, "bvule": lambda a, b: a <= b,
              "bvugt": lambda a, b: a > b, "bvuge": lambda a, b: a >= b}


def _force_cmp(x, y, op, env, depth):
    for side, other, left in ((x, y, True), (y, x, False)):
        bound = _eval_plain(other, env)
        if left:
            want = {"bvult": bound - 1, "bvule": bound,
                    "bvugt": bound + 1, "bvuge": bound}[op]
        else:
            want = {"bvult": bound + 1, "bvule": bound,
                    "bvugt": bound - 1, "bvuge": bound}[op]
        width = side.sort[1]
        if 0 <= want <= _mask(width) \
                and _solve_to_value(side, want, env, depth + 1):
            return True
        if _force_cmp_side(side, bound, op, left, env, depth + 1):
            return True
    return False


def _force_cmp_side(term, bound, op, left, env, depth):
    """Make `term <op> bound` (or `bound <op> term`) hold by steering ite
    conditions toward a branch that already satisfies the comparison."""
    if depth > 12:
        return False
    while term.op == "zero_extend":
        term = term.args[0]
    if term.op != "ite":
        value = _eval_plain(term, env)
        return _CMP_HOLDS[op](value, bound) if left \
            else _CMP_HOLDS[op](bound, value)
    cond, then, els = term.args
    for pick, sub in ((True, then), (False, els)):
        value = _eval_plain(sub, env)
        ok = _CMP_HOLDS[op](value, bound) if left \
            else _CMP_HOLDS[op](bound, value)
        if (ok or _force_cmp_side(sub, bound, op, left, env, depth + 1)) \
                and _force(cond, pick, env, depth + 1):
            return True
    return False


def _repair(a, env):
    return _force(a, True, env)


def _greedy_model(residual):
    """Deterministic best-effort assignment; returns a full env that makes
    every conjunct true, or None to fall back to bit-blasting."""
    vars_ = {}
    seen = set()
    for a in residual:
        _collect_vars(a, vars_, seen)
    env = {name: (False if sort == BOOL else 0)
           for name, sort in vars_.items()}
    for _round in range(8):
        all_ok = True
        progressed = False
        for a in residual:
            if _eval_plain(a, env):
                continue
            all_ok = False
            if _repair(a, env):
                progressed = True
            else:
                return None
        if all_ok:
            return env
        if not progressed:
            return None
    if all(_eval_plain(a, env) for a in residual):
        return env
    return None


def _match_binding(ctx, term, subst):
    """Recognize definitional conjuncts: (= var t), a bare variable, or its
    negation.  The variable must be fresh and must not occur in t."""
    if term.op == "var" and term.sort == BOOL and term not in subst:
        return term, ctx.TRUE
    if term.op == "not" and term.args[0].op == "var" \
            and term.args[0] not in subst:
        return term.args[0], ctx.FALSE
    if term.op != "=":
        return None
    a, b = term.args
    for var, value in ((a, b), (b, a)):
        if var.op == "var" and var not in subst and not occurs(var, value):
            return var, value
    return None


class _Evaluator:
    def __init__(self, ctx, env, subst):
        self.ctx = ctx
        self.env = env             # var name -> int/bool (residual model)
        self.subst = subst         # var term -> term
        self.memo = {}

    def eval(self, term):
        hit = self.memo.get(id(term))
        if hit is not None:
            return hit
        out = self._eval(term)
        self.memo[id(term)] = out
        return out

    def _eval(self, term):
        op = term.op
        if op == "cbool":
            return term.val
        if op == "const":
            return term.val[0]
        if op == "var":
            if term.val in self.env:
                return self.env[term.val]
            if term in self.subst:
                return self.eval(self.subst[term])
            return False if term.sort == BOOL else 0
        if op == "not":
            return not self.eval(term.args[0])
        if op == "and":
            return all(self.eval(a) for a in term.args)
        if op == "or":
            return any(self.eval(a) for a in term.args)
        if op == "xor":
            out = False
            for a in term.args:
                out ^= self.eval(a)
            return out
        if op == "=>":
            return (not self.eval(term.args[0])) or self.eval(term.args[1])
        if op == "=":
            return self.eval(term.args[0]) == self.eval(term.args[1])
        if op == "distinct":
            return self.eval(term.args[0]) != self.eval(term.args[1])
        if op == "ite":
            return self.eval(term.args[1] if self.eval(term.args[0])
                             else term.args[2])
        if op in BV_BINOPS:
            width = term.sort[1]
            return _bv_arith(op, self.eval(term.args[0]),
                             self.eval(term.args[1]), width) & _mask(width)
        if op in BV_CMPS:
            x, y = self.eval(term.args[0]), self.eval(term.args[1])
            return {"bvult": x < y, "bvule": x <= y,
                    "bvugt": x > y, "bvuge": x >= y}[op]
        if op == "bvnot":
            return ~self.eval(term.args[0]) & _mask(term.sort[1])
        if op == "bvneg":
            return -self.eval(term.args[0]) & _mask(term.sort[1])
        if op == "zero_extend":
            return self.eval(term.args[0])
        if op == "sign_extend":
            v = self.eval(term.args[0])
            w = term.args[0].sort[1]
            if v >> (w - 1):
                v |= _mask(term.val) << w
            return v
        if op == "extract":
            hi, lo = term.val
            return (self.eval(term.args[0]) >> lo) & _mask(hi - lo + 1)
        if op == "concat":
            low_w = term.args[1].sort[1]
            return (self.eval(term.args[0]) << low_w) | self.eval(term.args[1])
        raise SmtError("cannot evaluate %r" % op)


# ---------------------------------------------------------------------------
# Whole-script entry point
# ---------------------------------------------------------------------------

DEFAULT_CONFLICT_BUDGET = 50000


def solve_text(text, conflict_budget=DEFAULT_CONFLICT_BUDGET):
    """Run one SMT-LIB 2 script; returns the response text the process
    interface prints: sat/unsat/unknown, then one ((term value) ...) line.

    The conflict budget bounds pathological bit-level searches; exceeding
    it reports unknown (deterministically: conflicts are not time-based).
    """
    ctx, script = parse_script(text)
    if not script.has_check:
        return "unknown\n(error \"no check-sat command\")\n"
    try:
        result = solve_commands(ctx, script, conflict_budget)
    except SmtUnknown as exc:
        return 'unknown\n(:reason-unknown "%s")\n' % exc
    if result.status == "unsat":
        return "unsat\n"
    if result.status == "unknown":
        return "unknown\n(:reason-unknown \"%s\")\n" % result.reason
    out = ["sat"]
    if result.values:
        out.append("(%s)" % " ".join("(%s %s)" % pair
                                     for pair in result.values))
    return "\n".join(out) + "\n"
