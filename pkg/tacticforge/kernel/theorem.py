"""
Theorems and the primitive inference rules.

Only this module constructs Theorem values. Everything else obtains theorems
through the ten primitive rules below, or through the Environment, which may
seal axioms, definitions and imported theorems with their provenance recorded.
"""
import logging

from enum import Enum
from typing import Iterable

from tacticforge.errors import FreeVarCapture, KernelError, NotAnEquation, RuleMismatch, TypeMismatch
from tacticforge.kernel.terms import (
    Abs,
    Comb,
    TermExpr,
    Var,
    alpha_equal,
    bool_check,
    dest_eq,
    frees,
    inst_type,
    mk_eq,
    vsubst,
)
from tacticforge.kernel.types import TyVar, TypeExpr
from tacticforge.sexpr.codec import alpha_key, print_term
from tacticforge.sexpr.fingerprint import term_fingerprint


logger = logging.getLogger(__name__)


class Provenance(str, Enum):
    kernel = "KERNEL"
    axiom = "AXIOM"
    definition = "DEFINITION"
    imported = "IMPORTED"


class RuleId(str, Enum):
    REFL = "REFL"
    TRANS = "TRANS"
    MK_COMB = "MK_COMB"
    ABS = "ABS"
    BETA = "BETA"
    ASSUME = "ASSUME"
    EQ_MP = "EQ_MP"
    DEDUCT_ANTISYM = "DEDUCT_ANTISYM"
    INST = "INST"
    INST_TYPE = "INST_TYPE"


_SEAL = object()


def _canonical_hyps(hyps: Iterable[TermExpr]) -> tuple[TermExpr, ...]:
    unique: dict[str, TermExpr] = {}
    for hyp in hyps:
        unique.setdefault(alpha_key(hyp), hyp)
    return tuple(
        unique[key] for key in sorted(unique, key=lambda k: (term_fingerprint(unique[k]), k))
    )


class Theorem:
    """
    A sequent `hyps |- conclusion`. Hypotheses are deduplicated up to alpha
    equivalence and kept sorted by fingerprint.
    """

    __slots__ = ("hyps", "conclusion", "provenance", "_hyp_keys")

    def __init__(self, seal, hyps: Iterable[TermExpr], conclusion: TermExpr, provenance: Provenance):
        if seal is not _SEAL:
            raise KernelError("Theorems can only be created by kernel rules")
        hyps = _canonical_hyps(hyps)
        for hyp in hyps:
            bool_check(hyp, "hypothesis")
        bool_check(conclusion, "conclusion")
        object.__setattr__(self, "hyps", hyps)
        object.__setattr__(self, "conclusion", conclusion)
        object.__setattr__(self, "provenance", provenance)
        object.__setattr__(self, "_hyp_keys", frozenset(alpha_key(h) for h in hyps))

    def __setattr__(self, key, value):
        raise AttributeError("Theorem is immutable")

    def has_hyp(self, tm: TermExpr) -> bool:
        return alpha_key(tm) in self._hyp_keys

    def hyp_keys(self) -> frozenset[str]:
        return self._hyp_keys

    def __repr__(self):
        hyps = ", ".join(print_term(h) for h in self.hyps)
        return f"Theorem([{hyps}] |- {print_term(self.conclusion)})"


def _kernel_theorem(hyps: Iterable[TermExpr], conclusion: TermExpr) -> Theorem:
    return Theorem(_SEAL, hyps, conclusion, Provenance.kernel)


def _sealed_theorem(hyps: Iterable[TermExpr], conclusion: TermExpr, provenance: Provenance) -> Theorem:
    """For the Environment and trusted imports only."""

    return Theorem(_SEAL, hyps, conclusion, provenance)


def _remove_hyp(hyps: tuple[TermExpr, ...], tm: TermExpr) -> list[TermExpr]:
    key = alpha_key(tm)
    return [h for h in hyps if alpha_key(h) != key]


def _dest_eq_theorem(th: Theorem, rule: str) -> tuple[TermExpr, TermExpr]:
    try:
        return dest_eq(th.conclusion)
    except NotAnEquation:
        raise NotAnEquation(f"{rule}: conclusion is not an equation: {print_term(th.conclusion)}")


# primitive rules

def REFL(tm: TermExpr) -> Theorem:
    return _kernel_theorem((), mk_eq(tm, tm))


def TRANS(th1: Theorem, th2: Theorem) -> Theorem:
    left, middle = _dest_eq_theorem(th1, "TRANS")
    middle2, right = _dest_eq_theorem(th2, "TRANS")
    if not alpha_equal(middle, middle2):
        raise RuleMismatch(
            f"TRANS: equations do not chain: {print_term(middle)} vs {print_term(middle2)}"
        )
    return _kernel_theorem(th1.hyps + th2.hyps, mk_eq(left, right))


def MK_COMB(th1: Theorem, th2: Theorem) -> Theorem:
    f, g = _dest_eq_theorem(th1, "MK_COMB")
    x, y = _dest_eq_theorem(th2, "MK_COMB")
    try:
        lhs, rhs = Comb(f, x), Comb(g, y)
    except TypeMismatch as e:
        raise RuleMismatch(f"MK_COMB: {e}") from e
    return _kernel_theorem(th1.hyps + th2.hyps, mk_eq(lhs, rhs))


def ABS(v: Var, th: Theorem) -> Theorem:
    if not isinstance(v, Var):
        raise RuleMismatch("ABS: expected a variable to abstract over")
    lhs, rhs = _dest_eq_theorem(th, "ABS")
    if any(v in frees(h) for h in th.hyps):
        raise FreeVarCapture(f"ABS: variable {v.name} is free in a hypothesis")
    return _kernel_theorem(th.hyps, mk_eq(Abs(v, lhs), Abs(v, rhs)))


def BETA(tm: TermExpr) -> Theorem:
    """|- (\\x. t) x = t, where the argument is exactly the bound variable."""

    if not (isinstance(tm, Comb) and isinstance(tm.fn, Abs) and tm.arg == tm.fn.bound):
        raise RuleMismatch("BETA: term must be an abstraction applied to its own bound variable")
    return _kernel_theorem((), mk_eq(tm, tm.fn.body))


def ASSUME(tm: TermExpr) -> Theorem:
    try:
        bool_check(tm, "assumption")
    except TypeMismatch as e:
        raise RuleMismatch(f"ASSUME: {e}") from e
    return _kernel_theorem((tm,), tm)


def EQ_MP(th1: Theorem, th2: Theorem) -> Theorem:
    p, q = _dest_eq_theorem(th1, "EQ_MP")
    if not alpha_equal(p, th2.conclusion):
        raise RuleMismatch(
            f"EQ_MP: {print_term(th2.conclusion)} does not match {print_term(p)}"
        )
    return _kernel_theorem(th1.hyps + th2.hyps, q)


def DEDUCT_ANTISYM(th1: Theorem, th2: Theorem) -> Theorem:
    hyps = _remove_hyp(th1.hyps, th2.conclusion) + _remove_hyp(th2.hyps, th1.conclusion)
    return _kernel_theorem(hyps, mk_eq(th1.conclusion, th2.conclusion))


def INST(theta: dict[Var, TermExpr], th: Theorem) -> Theorem:
    try:
        hyps = [vsubst(theta, h) for h in th.hyps]
        conclusion = vsubst(theta, th.conclusion)
    except TypeMismatch as e:
        raise RuleMismatch(f"INST: {e}") from e
    return _kernel_theorem(hyps, conclusion)


def INST_TYPE(tyinst: dict[TyVar, TypeExpr], th: Theorem) -> Theorem:
    if any(not isinstance(v, TyVar) for v in tyinst):
        raise RuleMismatch("INST_TYPE: only type variables can be instantiated")
    hyps = [inst_type(tyinst, h) for h in th.hyps]
    return _kernel_theorem(hyps, inst_type(tyinst, th.conclusion))


_RULES = {
    RuleId.REFL: REFL,
    RuleId.TRANS: TRANS,
    RuleId.MK_COMB: MK_COMB,
    RuleId.ABS: ABS,
    RuleId.BETA: BETA,
    RuleId.ASSUME: ASSUME,
    RuleId.EQ_MP: EQ_MP,
    RuleId.DEDUCT_ANTISYM: DEDUCT_ANTISYM,
    RuleId.INST: INST,
    RuleId.INST_TYPE: INST_TYPE,
}


def kernel_rule(rule: RuleId | str, *inputs) -> Theorem:
    """
    Apply a primitive rule by name.

    Args:
        rule: one of the ten RuleId values
        inputs: the rule's arguments in schema order, e.g. (th1, th2) for TRANS,
            (var, th) for ABS, (instantiation, th) for INST and INST_TYPE
    """

    try:
        rule = RuleId(rule)
    except ValueError:
        raise RuleMismatch(f"Unknown kernel rule: {rule}")
    try:
        return _RULES[rule](*inputs)
    except TypeError as e:
        raise RuleMismatch(f"{rule.value}: bad arguments ({e})") from e
