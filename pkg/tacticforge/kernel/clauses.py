"""
Boolean simplification clauses used as the default rewrites.

Each clause is proved from the boolean definitions at first use. Free
variables act as rewrite pattern variables.
"""
import logging

from functools import cache

from tacticforge.kernel.derived import (
    CCONTR,
    CHOOSE,
    CONJ,
    CONJUNCT1,
    CONJUNCT2,
    CONTR,
    DISCH,
    DISJ1,
    DISJ2,
    DISJ_CASES,
    EQF_ELIM,
    EQF_INTRO,
    EQT_ELIM,
    EQT_INTRO,
    EXISTS,
    GEN,
    IMP_ANTISYM_RULE,
    MP,
    NOT_ELIM,
    NOT_INTRO,
    SPEC,
    SYM,
    truth,
)
from tacticforge.kernel.syntax import (
    FALSE,
    TRUE,
    mk_conj,
    mk_disj,
    mk_exists,
    mk_forall,
    mk_imp,
    mk_neg,
)
from tacticforge.kernel.terms import Var, mk_eq
from tacticforge.kernel.theorem import ASSUME, REFL, Theorem
from tacticforge.kernel.types import ALPHA, BOOL


logger = logging.getLogger(__name__)


t = Var("t", BOOL)
x = Var("x", ALPHA)


def _iff(forward: Theorem, backward: Theorem) -> Theorem:
    return IMP_ANTISYM_RULE(forward, backward)


def _refl_clause() -> list[Theorem]:
    return [EQT_INTRO(REFL(x))]


def _eq_clauses() -> list[Theorem]:
    t_eq_true = mk_eq(t, TRUE)
    true_eq_t = mk_eq(TRUE, t)
    t_eq_false = mk_eq(t, FALSE)
    false_eq_t = mk_eq(FALSE, t)
    not_t = mk_neg(t)
    return [
        _iff(
            DISCH(true_eq_t, EQT_ELIM(SYM(ASSUME(true_eq_t)))),
            DISCH(t, SYM(EQT_INTRO(ASSUME(t)))),
        ),
        _iff(
            DISCH(t_eq_true, EQT_ELIM(ASSUME(t_eq_true))),
            DISCH(t, EQT_INTRO(ASSUME(t))),
        ),
        _iff(
            DISCH(false_eq_t, EQF_ELIM(SYM(ASSUME(false_eq_t)))),
            DISCH(not_t, SYM(EQF_INTRO(ASSUME(not_t)))),
        ),
        _iff(
            DISCH(t_eq_false, EQF_ELIM(ASSUME(t_eq_false))),
            DISCH(not_t, EQF_INTRO(ASSUME(not_t))),
        ),
    ]


def _not_clauses() -> list[Theorem]:
    not_true = mk_neg(TRUE)
    not_not_t = mk_neg(mk_neg(t))
    not_t = mk_neg(t)
    return [
        _iff(
            DISCH(not_true, MP(NOT_ELIM(ASSUME(not_true)), truth())),
            DISCH(FALSE, CONTR(not_true, ASSUME(FALSE))),
        ),
        EQT_INTRO(NOT_INTRO(DISCH(FALSE, ASSUME(FALSE)))),
        _iff(
            DISCH(not_not_t, CCONTR(t, MP(NOT_ELIM(ASSUME(not_not_t)), ASSUME(not_t)))),
            DISCH(t, NOT_INTRO(DISCH(not_t, MP(NOT_ELIM(ASSUME(not_t)), ASSUME(t))))),
        ),
    ]


def _and_clauses() -> list[Theorem]:
    true_and = mk_conj(TRUE, t)
    and_true = mk_conj(t, TRUE)
    false_and = mk_conj(FALSE, t)
    and_false = mk_conj(t, FALSE)
    and_self = mk_conj(t, t)
    return [
        _iff(DISCH(true_and, CONJUNCT2(ASSUME(true_and))), DISCH(t, CONJ(truth(), ASSUME(t)))),
        _iff(DISCH(and_true, CONJUNCT1(ASSUME(and_true))), DISCH(t, CONJ(ASSUME(t), truth()))),
        _iff(
            DISCH(false_and, CONJUNCT1(ASSUME(false_and))),
            DISCH(FALSE, CONTR(false_and, ASSUME(FALSE))),
        ),
        _iff(
            DISCH(and_false, CONJUNCT2(ASSUME(and_false))),
            DISCH(FALSE, CONTR(and_false, ASSUME(FALSE))),
        ),
        _iff(DISCH(and_self, CONJUNCT1(ASSUME(and_self))), DISCH(t, CONJ(ASSUME(t), ASSUME(t)))),
    ]


def _or_clauses() -> list[Theorem]:
    false_or = mk_disj(FALSE, t)
    or_false = mk_disj(t, FALSE)
    or_self = mk_disj(t, t)
    return [
        EQT_INTRO(DISJ1(truth(), t)),
        EQT_INTRO(DISJ2(t, truth())),
        _iff(
            DISCH(false_or, DISJ_CASES(ASSUME(false_or), CONTR(t, ASSUME(FALSE)), ASSUME(t))),
            DISCH(t, DISJ2(FALSE, ASSUME(t))),
        ),
        _iff(
            DISCH(or_false, DISJ_CASES(ASSUME(or_false), ASSUME(t), CONTR(t, ASSUME(FALSE)))),
            DISCH(t, DISJ1(ASSUME(t), FALSE)),
        ),
        _iff(
            DISCH(or_self, DISJ_CASES(ASSUME(or_self), ASSUME(t), ASSUME(t))),
            DISCH(t, DISJ1(ASSUME(t), t)),
        ),
    ]


def _imp_clauses() -> list[Theorem]:
    true_imp = mk_imp(TRUE, t)
    imp_false = mk_imp(t, FALSE)
    not_t = mk_neg(t)
    return [
        _iff(DISCH(true_imp, MP(ASSUME(true_imp), truth())), DISCH(t, DISCH(TRUE, ASSUME(t)))),
        EQT_INTRO(DISCH(t, truth())),
        EQT_INTRO(DISCH(FALSE, CONTR(t, ASSUME(FALSE)))),
        EQT_INTRO(DISCH(t, ASSUME(t))),
        _iff(DISCH(imp_false, NOT_INTRO(ASSUME(imp_false))), DISCH(not_t, NOT_ELIM(ASSUME(not_t)))),
    ]


def _quantifier_clauses() -> list[Theorem]:
    forall_t = mk_forall(x, t)
    exists_t = mk_exists(x, t)
    return [
        _iff(DISCH(forall_t, SPEC(x, ASSUME(forall_t))), DISCH(t, GEN(x, ASSUME(t)))),
        _iff(
            DISCH(exists_t, CHOOSE(x, ASSUME(exists_t), ASSUME(t))),
            DISCH(t, EXISTS(exists_t, x, ASSUME(t))),
        ),
    ]


@cache
def basic_rewrites() -> tuple[Theorem, ...]:
    """The default rewrite set applied by REWRITE_TAC and its variants."""

    clauses = (
        _refl_clause()
        + _eq_clauses()
        + _not_clauses()
        + _and_clauses()
        + _or_clauses()
        + _imp_clauses()
        + _quantifier_clauses()
    )
    logger.debug(f"Proved {len(clauses)} basic rewrite clauses")
    return tuple(clauses)
