"""
Constructors and destructors for the logical connectives and quantifiers.
"""
from tacticforge.errors import RuleMismatch
from tacticforge.kernel.terms import Abs, Comb, Const, TermExpr, Var, bool_check, is_eq, mk_eq
from tacticforge.kernel.types import BOOL, TypeExpr, fun_type


BOOL_BINOP = fun_type(BOOL, fun_type(BOOL, BOOL))

TRUE = Const("T", BOOL)
FALSE = Const("F", BOOL)
AND = Const("/\\", BOOL_BINOP)
OR = Const("\\/", BOOL_BINOP)
IMP = Const("==>", BOOL_BINOP)
NOT = Const("~", fun_type(BOOL, BOOL))


def quantifier_const(name: str, ty: TypeExpr) -> Const:
    return Const(name, fun_type(fun_type(ty, BOOL), BOOL))


def _mk_binary(op: Const, a: TermExpr, b: TermExpr) -> TermExpr:
    bool_check(a)
    bool_check(b)
    return Comb(Comb(op, a), b)


def _is_binary(tm: TermExpr, name: str) -> bool:
    return (
        isinstance(tm, Comb)
        and isinstance(tm.fn, Comb)
        and isinstance(tm.fn.fn, Const)
        and tm.fn.fn.name == name
    )


def _dest_binary(tm: TermExpr, name: str) -> tuple[TermExpr, TermExpr]:
    if not _is_binary(tm, name):
        raise RuleMismatch(f"Not a {name} term")
    return tm.fn.arg, tm.arg


def mk_conj(a, b):
    return _mk_binary(AND, a, b)


def mk_disj(a, b):
    return _mk_binary(OR, a, b)


def mk_imp(a, b):
    return _mk_binary(IMP, a, b)


def mk_neg(a):
    bool_check(a)
    return Comb(NOT, a)


def is_conj(tm) -> bool:
    return _is_binary(tm, "/\\")


def is_disj(tm) -> bool:
    return _is_binary(tm, "\\/")


def is_imp(tm) -> bool:
    return _is_binary(tm, "==>")


def is_neg(tm) -> bool:
    return isinstance(tm, Comb) and isinstance(tm.fn, Const) and tm.fn.name == "~"


def dest_conj(tm):
    return _dest_binary(tm, "/\\")


def dest_disj(tm):
    return _dest_binary(tm, "\\/")


def dest_imp(tm):
    return _dest_binary(tm, "==>")


def dest_neg(tm) -> TermExpr:
    if not is_neg(tm):
        raise RuleMismatch("Not a negation")
    return tm.arg


def is_bool_eq(tm) -> bool:
    return is_eq(tm) and tm.arg.ty == BOOL


def mk_iff(a, b):
    bool_check(a)
    bool_check(b)
    return mk_eq(a, b)


# quantifiers

def _mk_binder(name: str, v: Var, body: TermExpr) -> TermExpr:
    bool_check(body, "quantifier body")
    return Comb(quantifier_const(name, v.ty), Abs(v, body))


def _is_binder(tm, name: str) -> bool:
    return (
        isinstance(tm, Comb)
        and isinstance(tm.fn, Const)
        and tm.fn.name == name
        and isinstance(tm.arg, Abs)
    )


def _dest_binder(tm, name: str) -> tuple[Var, TermExpr]:
    if not _is_binder(tm, name):
        raise RuleMismatch(f"Not a {name} quantification")
    return tm.arg.bound, tm.arg.body


def mk_forall(v: Var, body: TermExpr) -> TermExpr:
    return _mk_binder("!", v, body)


def mk_exists(v: Var, body: TermExpr) -> TermExpr:
    return _mk_binder("?", v, body)


def is_forall(tm) -> bool:
    return _is_binder(tm, "!")


def is_exists(tm) -> bool:
    return _is_binder(tm, "?")


def dest_forall(tm):
    return _dest_binder(tm, "!")


def dest_exists(tm):
    return _dest_binder(tm, "?")


def list_mk_forall(vs, body):
    for v in reversed(list(vs)):
        body = mk_forall(v, body)
    return body


def strip_forall(tm) -> tuple[list[Var], TermExpr]:
    vs = []
    while is_forall(tm):
        v, tm = dest_forall(tm)
        vs.append(v)
    return vs, tm


def conjuncts(tm) -> list[TermExpr]:
    if is_conj(tm):
        a, b = dest_conj(tm)
        return conjuncts(a) + conjuncts(b)
    return [tm]


def disjuncts(tm) -> list[TermExpr]:
    if is_disj(tm):
        a, b = dest_disj(tm)
        return disjuncts(a) + disjuncts(b)
    return [tm]


def is_true(tm) -> bool:
    return tm == TRUE
