"""
Derived inference rules.

Every rule here is a composition of the primitive rules in
`tacticforge.kernel.theorem`, so none of them can produce a theorem the
primitives could not.
"""
import logging

from functools import cache

from tacticforge.errors import FreeVarCapture, RuleMismatch
from tacticforge.kernel.bootstrap import EXCLUDED_MIDDLE, bool_environment
from tacticforge.kernel.matching import retype_instantiation
from tacticforge.kernel.syntax import (
    BOOL_BINOP,
    FALSE,
    TRUE,
    dest_conj,
    dest_disj,
    dest_exists,
    dest_forall,
    dest_imp,
    dest_neg,
    mk_conj,
    mk_disj,
    mk_forall,
    mk_imp,
    mk_neg,
)
from tacticforge.kernel.terms import (
    Abs,
    Comb,
    Const,
    TermExpr,
    Var,
    alpha_equal,
    bool_check,
    dest_eq,
    free_in,
    frees,
    frees_of_terms,
    is_beta_redex,
    list_mk_abs,
    strip_comb,
    variant,
    vsubst,
)
from tacticforge.kernel.theorem import (
    ABS,
    ASSUME,
    BETA,
    DEDUCT_ANTISYM,
    EQ_MP,
    INST,
    INST_TYPE,
    MK_COMB,
    REFL,
    TRANS,
    Theorem,
)
from tacticforge.kernel.types import BOOL, type_match
from tacticforge.sexpr.codec import alpha_key, print_term


logger = logging.getLogger(__name__)


def _definition(name: str) -> Theorem:
    return bool_environment().definition(name)


def _rhs(th: Theorem) -> TermExpr:
    return dest_eq(th.conclusion)[1]


def _avoiding(th_list, *terms) -> frozenset[Var]:
    avoid = frees_of_terms(terms)
    for th in th_list:
        avoid = avoid | frees_of_terms(th.hyps) | frees(th.conclusion)
    return avoid


# equality

def AP_TERM(f: TermExpr, th: Theorem) -> Theorem:
    return MK_COMB(REFL(f), th)


def AP_THM(th: Theorem, x: TermExpr) -> Theorem:
    return MK_COMB(th, REFL(x))


def SYM(th: Theorem) -> Theorem:
    lhs, _ = dest_eq(th.conclusion)
    eq = th.conclusion.fn.fn
    lth = REFL(lhs)
    return EQ_MP(MK_COMB(AP_TERM(eq, th), lth), lth)


def ALPHA(t1: TermExpr, t2: TermExpr) -> Theorem:
    return TRANS(REFL(t1), REFL(t2))


def BETA_CONV(tm: TermExpr) -> Theorem:
    """|- (\\x. t) s = t[s/x]"""

    if not is_beta_redex(tm):
        raise RuleMismatch(f"BETA_CONV: not a beta redex: {print_term(tm)}")
    lam = tm.fn
    if tm.arg == lam.bound:
        return BETA(tm)
    return INST({lam.bound: tm.arg}, BETA(Comb(lam, lam.bound)))


def head_beta_step(tm: TermExpr) -> Theorem:
    head, args = strip_comb(tm)
    if not isinstance(head, Abs) or not args:
        raise RuleMismatch(f"No head redex in {print_term(tm)}")
    th = BETA_CONV(Comb(head, args[0]))
    for arg in args[1:]:
        th = AP_THM(th, arg)
    return th


def head_beta_steps(tm: TermExpr, n: int) -> Theorem:
    th = REFL(tm)
    for _ in range(n):
        th = TRANS(th, head_beta_step(_rhs(th)))
    return th


def unfold(def_th: Theorem, tm: TermExpr) -> Theorem:
    """
    Expand the defined constant at the head of `tm`.

    For a definition |- c = \\x1 ... xn. body and tm = c a1 ... ak, returns
    |- tm = body[a1/x1, ...], reducing only the redexes the expansion creates.
    """

    head, args = strip_comb(tm)
    constant, body = dest_eq(def_th.conclusion)
    if not isinstance(head, Const) or head.name != constant.name:
        raise RuleMismatch(f"Cannot unfold {constant.name} in {print_term(tm)}")
    th = INST_TYPE(type_match(constant.ty, head.ty, {}), def_th)
    lambdas = 0
    while isinstance(body, Abs):
        lambdas += 1
        body = body.body
    for arg in args:
        th = AP_THM(th, arg)
    return TRANS(th, head_beta_steps(_rhs(th), min(lambdas, len(args))))


def INSTANTIATE(tyinst, theta, th: Theorem) -> Theorem:
    if tyinst:
        th = INST_TYPE(tyinst, th)
    if theta:
        th = INST(retype_instantiation(tyinst, theta), th)
    return th


# truth

@cache
def truth() -> Theorem:
    """|- T"""

    t_def = _definition("T")
    identity = _rhs(t_def).arg
    return EQ_MP(SYM(t_def), REFL(identity))


def EQT_INTRO(th: Theorem) -> Theorem:
    return DEDUCT_ANTISYM(th, truth())


def EQT_ELIM(th: Theorem) -> Theorem:
    _, rhs = dest_eq(th.conclusion)
    if rhs != TRUE:
        raise RuleMismatch("EQT_ELIM: right-hand side is not T")
    return EQ_MP(SYM(th), truth())


def PROVE_HYP(th1: Theorem, th2: Theorem) -> Theorem:
    """Discharge the hypothesis `th1.conclusion` of th2 using th1."""

    if not th2.has_hyp(th1.conclusion):
        return th2
    return EQ_MP(DEDUCT_ANTISYM(th1, th2), th1)


# conjunction

def CONJ(th1: Theorem, th2: Theorem) -> Theorem:
    p, q = th1.conclusion, th2.conclusion
    f = variant(_avoiding([th1, th2]), Var("f", BOOL_BINOP))
    body = MK_COMB(AP_TERM(f, EQT_INTRO(th1)), EQT_INTRO(th2))
    return EQ_MP(SYM(unfold(_definition("/\\"), mk_conj(p, q))), ABS(f, body))


def _conjunct(th: Theorem, first: bool) -> Theorem:
    dest_conj(th.conclusion)
    unfolded = EQ_MP(unfold(_definition("/\\"), th.conclusion), th)
    x = Var("x", BOOL)
    y = Var("y", BOOL)
    selector = list_mk_abs([x, y], x if first else y)
    applied = AP_THM(unfolded, selector)
    lhs, rhs = dest_eq(applied.conclusion)
    left = head_beta_steps(lhs, 3)
    right = head_beta_steps(rhs, 3)
    return EQT_ELIM(TRANS(TRANS(SYM(left), applied), right))


def CONJUNCT1(th: Theorem) -> Theorem:
    return _conjunct(th, True)


def CONJUNCT2(th: Theorem) -> Theorem:
    return _conjunct(th, False)


def CONJUNCTS(th: Theorem) -> list[Theorem]:
    try:
        dest_conj(th.conclusion)
    except RuleMismatch:
        return [th]
    return CONJUNCTS(CONJUNCT1(th)) + CONJUNCTS(CONJUNCT2(th))


# implication

def MP(th_imp: Theorem, th: Theorem) -> Theorem:
    p, _ = dest_imp(th_imp.conclusion)
    if not alpha_equal(p, th.conclusion):
        raise RuleMismatch(
            f"MP: antecedent {print_term(p)} does not match {print_term(th.conclusion)}"
        )
    eq = EQ_MP(unfold(_definition("==>"), th_imp.conclusion), th_imp)
    return CONJUNCT2(EQ_MP(SYM(eq), th))


def DISCH(p: TermExpr, th: Theorem) -> Theorem:
    bool_check(p, "discharged term")
    q = th.conclusion
    left = CONJUNCT1(ASSUME(mk_conj(p, q)))
    right = CONJ(ASSUME(p), th)
    eq = DEDUCT_ANTISYM(right, left)
    return EQ_MP(SYM(unfold(_definition("==>"), mk_imp(p, q))), eq)


def UNDISCH(th: Theorem) -> Theorem:
    p, _ = dest_imp(th.conclusion)
    return MP(th, ASSUME(p))


def IMP_TRANS(th1: Theorem, th2: Theorem) -> Theorem:
    p, _ = dest_imp(th1.conclusion)
    return DISCH(p, MP(th2, MP(th1, ASSUME(p))))


# quantifiers

def GEN(x: Var, th: Theorem) -> Theorem:
    if not isinstance(x, Var):
        raise RuleMismatch("GEN: expected a variable")
    if any(free_in(x, h) for h in th.hyps):
        raise FreeVarCapture(f"GEN: {x.name} is free in a hypothesis")
    lam = ABS(x, EQT_INTRO(th))
    return EQ_MP(SYM(unfold(_definition("!"), mk_forall(x, th.conclusion))), lam)


def SPEC(t: TermExpr, th: Theorem) -> Theorem:
    x, _ = dest_forall(th.conclusion)
    if t.ty != x.ty:
        raise RuleMismatch(f"SPEC: {print_term(t)} has the wrong type for {x.name}")
    eq = EQ_MP(unfold(_definition("!"), th.conclusion), th)
    applied = AP_THM(eq, t)
    lhs, rhs = dest_eq(applied.conclusion)
    return EQT_ELIM(TRANS(TRANS(SYM(BETA_CONV(lhs)), applied), BETA_CONV(rhs)))


def SPEC_ALL(th: Theorem) -> Theorem:
    """Specialize every outer universal with a variable not free in the theorem."""

    avoid = set(_avoiding([th]))
    while True:
        try:
            x, _ = dest_forall(th.conclusion)
        except RuleMismatch:
            return th
        fresh = variant(avoid, x)
        avoid.add(fresh)
        th = SPEC(fresh, th)


def EXISTS(exists_tm: TermExpr, witness: TermExpr, th: Theorem) -> Theorem:
    """From A |- p[w/x] derive A |- ?x. p."""

    x, body = dest_exists(exists_tm)
    instance = vsubst({x: witness}, body)
    if not alpha_equal(instance, th.conclusion):
        raise RuleMismatch(f"EXISTS: {print_term(th.conclusion)} is not an instance of the body")

    unfolded = unfold(_definition("?"), exists_tm)
    q0, inner = dest_forall(_rhs(unfolded))
    q = variant(_avoiding([th], exists_tm, witness), Var("q", BOOL))
    hyp, _ = dest_imp(vsubst({q0: q}, inner))

    specialized = SPEC(witness, ASSUME(hyp))
    applied, _ = dest_imp(specialized.conclusion)
    applied_th = EQ_MP(SYM(BETA_CONV(applied)), th)
    q_th = MP(specialized, applied_th)
    return EQ_MP(SYM(unfolded), GEN(q, DISCH(hyp, q_th)))


def CHOOSE(v: Var, th_exists: Theorem, th: Theorem) -> Theorem:
    """
    From A |- ?x. p and B u {p[v/x]} |- c derive A u B |- c, where v is not
    free in c, in ?x. p, or in B.
    """

    x, body = dest_exists(th_exists.conclusion)
    if not isinstance(v, Var) or v.ty != x.ty:
        raise RuleMismatch("CHOOSE: expected a variable of the bound type")
    instance = vsubst({x: v}, body)
    c = th.conclusion
    instance_key = alpha_key(instance)
    if free_in(v, c) or free_in(v, th_exists.conclusion):
        raise FreeVarCapture(f"CHOOSE: {v.name} is free in the conclusion or the existential")
    if any(free_in(v, h) for h in th.hyps if alpha_key(h) != instance_key):
        raise FreeVarCapture(f"CHOOSE: {v.name} is free in a hypothesis")

    unfolded = EQ_MP(unfold(_definition("?"), th_exists.conclusion), th_exists)
    specialized = SPEC(c, unfolded)
    applied = Comb(th_exists.conclusion.arg, v)
    from_applied = EQ_MP(BETA_CONV(applied), ASSUME(applied))
    discharged = DISCH(applied, PROVE_HYP(from_applied, th))
    return MP(specialized, GEN(v, discharged))


# disjunction

def _disj_intro(p: TermExpr, q: TermExpr, th: Theorem, left: bool) -> Theorem:
    disj = mk_disj(p, q)
    unfolded = unfold(_definition("\\/"), disj)
    r0, inner = dest_forall(_rhs(unfolded))
    r = variant(_avoiding([th], disj), Var("r", BOOL))
    case_p, rest = dest_imp(vsubst({r0: r}, inner))
    case_q, _ = dest_imp(rest)
    r_th = MP(ASSUME(case_p if left else case_q), th)
    body = DISCH(case_p, DISCH(case_q, r_th))
    return EQ_MP(SYM(unfolded), GEN(r, body))


def DISJ1(th: Theorem, q: TermExpr) -> Theorem:
    return _disj_intro(th.conclusion, q, th, True)


def DISJ2(p: TermExpr, th: Theorem) -> Theorem:
    return _disj_intro(p, th.conclusion, th, False)


def DISJ_CASES(th: Theorem, th1: Theorem, th2: Theorem) -> Theorem:
    p, q = dest_disj(th.conclusion)
    c = th1.conclusion
    if not alpha_equal(c, th2.conclusion):
        raise RuleMismatch("DISJ_CASES: the two cases prove different conclusions")
    unfolded = EQ_MP(unfold(_definition("\\/"), th.conclusion), th)
    specialized = SPEC(c, unfolded)
    return MP(MP(specialized, DISCH(p, th1)), DISCH(q, th2))


# negation and falsity

def NOT_ELIM(th: Theorem) -> Theorem:
    dest_neg(th.conclusion)
    return EQ_MP(unfold(_definition("~"), th.conclusion), th)


def NOT_INTRO(th: Theorem) -> Theorem:
    p, f = dest_imp(th.conclusion)
    if f != FALSE:
        raise RuleMismatch("NOT_INTRO: consequent is not F")
    return EQ_MP(SYM(unfold(_definition("~"), mk_neg(p))), th)


def CONTR(tm: TermExpr, th: Theorem) -> Theorem:
    if th.conclusion != FALSE:
        raise RuleMismatch("CONTR: theorem does not conclude F")
    bool_check(tm)
    return SPEC(tm, EQ_MP(unfold(_definition("F"), FALSE), th))


def excluded_middle() -> Theorem:
    """|- !t. t \\/ ~t"""

    return bool_environment().axiom(EXCLUDED_MIDDLE)


def CCONTR(p: TermExpr, th: Theorem) -> Theorem:
    """From A |- F derive A - {~p} |- p."""

    if th.conclusion != FALSE:
        raise RuleMismatch("CCONTR: theorem does not conclude F")
    em = SPEC(p, excluded_middle())
    return DISJ_CASES(em, ASSUME(p), CONTR(p, th))


# boolean equality

def IMP_ANTISYM_RULE(th1: Theorem, th2: Theorem) -> Theorem:
    return DEDUCT_ANTISYM(UNDISCH(th2), UNDISCH(th1))


def EQF_INTRO(th: Theorem) -> Theorem:
    p = dest_neg(th.conclusion)
    return IMP_ANTISYM_RULE(NOT_ELIM(th), DISCH(FALSE, CONTR(p, ASSUME(FALSE))))


def EQF_ELIM(th: Theorem) -> Theorem:
    p, f = dest_eq(th.conclusion)
    if f != FALSE:
        raise RuleMismatch("EQF_ELIM: right-hand side is not F")
    return NOT_INTRO(DISCH(p, EQ_MP(th, ASSUME(p))))
