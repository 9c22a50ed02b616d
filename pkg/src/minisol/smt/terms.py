"""Interned term representation for the bundled SMT solver.

Terms are immutable and hash-consed through a :class:`Ctx`, so structural
equality is identity equality and memo tables can key on ``id(term)``.
Sorts are ``('bool',)`` or ``('bv', width)``.
"""

from __future__ import annotations

BOOL = ("bool",)


def bv(width):
    return ("bv", width)


class SmtError(Exception):
    pass


class Term:
    __slots__ = ("op", "val", "args", "sort")

    def __init__(self, op, val, args, sort):
        self.op = op
        self.val = val
        self.args = args
        self.sort = sort

    def __repr__(self):
        return "<%s>" % print_term(self)


# operator -> (arity, result sort rule); 'same' means operand sort
BV_BINOPS = {"bvadd", "bvsub", "bvmul", "bvudiv", "bvurem", "bvand", "bvor",
             "bvxor", "bvshl", "bvlshr"}
BV_CMPS = {"bvult", "bvule", "bvugt", "bvuge"}
BV_UNOPS = {"bvnot", "bvneg"}
BOOL_OPS = {"and", "or", "xor", "not", "=>"}


class Ctx:
    def __init__(self):
        self._intern = {}
        self.TRUE = self.node("cbool", True, ())
        self.FALSE = self.node("cbool", False, ())

    def node(self, op, val, args, sort=None):
        key = (op, val, tuple(id(a) for a in args))
        hit = self._intern.get(key)
        if hit is not None:
            return hit
        if sort is None:
            sort = self._infer_sort(op, val, args)
        term = Term(op, val, tuple(args), sort)
        self._intern[key] = term
        return term

    def _infer_sort(self, op, val, args):
        if op == "cbool":
            return BOOL
        if op == "const":
            return bv(val[1])
        if op in BOOL_OPS or op in BV_CMPS or op in ("=", "distinct", "forall"):
            return BOOL
        if op in BV_BINOPS:
            return args[0].sort
        if op in BV_UNOPS:
            return args[0].sort
        if op == "ite":
            return args[1].sort
        if op == "extract":
            hi, lo = val
            return bv(hi - lo + 1)
        if op in ("zero_extend", "sign_extend"):
            return bv(args[0].sort[1] + val)
        if op == "concat":
            return bv(args[0].sort[1] + args[1].sort[1])
        raise SmtError("cannot infer sort of %r" % op)

    # -- convenience builders ------------------------------------------------

    def cbool(self, b):
        return self.TRUE if b else self.FALSE

    def const(self, value, width):
        return self.node("const", (value & ((1 << width) - 1), width), ())

    def var(self, name, sort):
        return self.node("var", name, (), sort)

    def app(self, fname, arg, ret_sort):
        return self.node("app", fname, (arg,), ret_sort)

    def mk(self, op, *args, val=None):
        return self.node(op, val, args)


def const_value(term):
    if term.op == "const":
        return term.val[0]
    if term.op == "cbool":
        return term.val
    raise SmtError("not a constant: %r" % term)


def is_const(term):
    return term.op in ("const", "cbool")


def print_term(t):
    if t.op == "cbool":
        return "true" if t.val else "false"
    if t.op == "const":
        value, width = t.val
        return "(_ bv%d %d)" % (value, width)
    if t.op == "var":
        return t.val
    if t.op == "app":
        return "(%s %s)" % (t.val, print_term(t.args[0]))
    if t.op == "forall":
        name, sort = t.val
        return "(forall ((%s %s)) %s)" % (name, print_sort(sort),
                                          print_term(t.args[0]))
    if t.op == "extract":
        hi, lo = t.val
        return "((_ extract %d %d) %s)" % (hi, lo, print_term(t.args[0]))
    if t.op in ("zero_extend", "sign_extend"):
        return "((_ %s %d) %s)" % (t.op, t.val, print_term(t.args[0]))
    return "(%s %s)" % (t.op, " ".join(print_term(a) for a in t.args))


def print_sort(sort):
    if sort == BOOL:
        return "Bool"
    return "(_ BitVec %d)" % sort[1]
