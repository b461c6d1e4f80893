import numpy as np
import pytest

from tacticforge.errors import (
    FreeVarCapture,
    FreeVariablesInDefinition,
    KernelError,
    NotAnEquation,
    Redefinition,
    RuleMismatch,
    TacticForgeError,
    TypeMismatch,
    UnknownConstant,
)
from tacticforge.kernel import derived
from tacticforge.kernel.syntax import FALSE, TRUE, mk_conj, mk_disj, mk_imp, mk_neg
from tacticforge.kernel.terms import Abs, Comb, Const, Var, alpha_equal, frees, mk_eq, mk_term
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
    Provenance,
    Theorem,
    kernel_rule,
)
from tacticforge.kernel.types import ALPHA, BOOL, TyApp, TyVar, fun_type
from tacticforge.sexpr.codec import print_term


p = Var("p", BOOL)
q = Var("q", BOOL)
x = Var("x", ALPHA)
y = Var("y", ALPHA)
z = Var("z", ALPHA)


def test_refl_proves_reflexivity():
    th = REFL(x)
    assert th.hyps == ()
    assert th.conclusion == mk_eq(x, x)
    assert th.provenance == Provenance.kernel


def test_trans_chains_equations():
    th = TRANS(ASSUME(mk_eq(x, y)), ASSUME(mk_eq(y, z)))
    assert th.conclusion == mk_eq(x, z)
    assert len(th.hyps) == 2


def test_trans_rejects_unchained_equations():
    with pytest.raises(RuleMismatch):
        TRANS(ASSUME(mk_eq(x, y)), ASSUME(mk_eq(x, z)))


def test_trans_rejects_non_equation():
    with pytest.raises(NotAnEquation):
        TRANS(ASSUME(p), REFL(q))


def test_mk_comb_rejects_ill_typed_application():
    f = Var("f", fun_type(BOOL, BOOL))
    with pytest.raises(RuleMismatch):
        MK_COMB(REFL(f), REFL(x))


def test_abs_rejects_variable_free_in_hypothesis():
    with pytest.raises(FreeVarCapture):
        ABS(x, ASSUME(mk_eq(x, y)))


def test_abs_abstracts_both_sides():
    th = ABS(z, ASSUME(mk_eq(x, y)))
    assert th.conclusion == mk_eq(Abs(z, x), Abs(z, y))


def test_beta_requires_bound_variable_argument():
    redex = Comb(Abs(x, x), x)
    assert BETA(redex).conclusion == mk_eq(redex, x)
    with pytest.raises(RuleMismatch):
        BETA(Comb(Abs(x, x), y))


def test_assume_rejects_non_boolean():
    with pytest.raises(RuleMismatch):
        ASSUME(x)


def test_eq_mp_and_deduct_antisym():
    th = DEDUCT_ANTISYM(ASSUME(p), ASSUME(q))
    assert th.conclusion == mk_eq(p, q)
    assert EQ_MP(th, ASSUME(p)).conclusion == q
    with pytest.raises(RuleMismatch):
        EQ_MP(th, ASSUME(q))


def test_inst_and_inst_type():
    th = INST({x: y}, REFL(x))
    assert th.conclusion == mk_eq(y, y)

    num = TyApp("num")
    th = INST_TYPE({TyVar("A"): num}, REFL(x))
    assert th.conclusion == mk_eq(Var("x", num), Var("x", num))


def test_theorems_cannot_be_forged():
    with pytest.raises(KernelError):
        Theorem(object(), (), TRUE, Provenance.kernel)


def test_theorems_are_immutable():
    th = REFL(x)
    with pytest.raises(AttributeError):
        th.conclusion = TRUE


def test_alpha_equal_hypotheses_are_merged():
    a = Abs(x, mk_eq(x, x))
    b = Abs(y, mk_eq(y, y))
    assert alpha_equal(a, b)
    th = DEDUCT_ANTISYM(ASSUME(mk_eq(a, a)), ASSUME(mk_eq(b, b)))
    assert th.hyps == ()


def test_kernel_rule_dispatch():
    assert kernel_rule("REFL", p).conclusion == mk_eq(p, p)
    with pytest.raises(RuleMismatch):
        kernel_rule("MAGIC", p)
    with pytest.raises(RuleMismatch):
        kernel_rule("TRANS", REFL(p))


def test_comb_checks_types():
    with pytest.raises(TypeMismatch):
        Comb(Var("f", fun_type(BOOL, BOOL)), x)
    with pytest.raises(TypeMismatch):
        Comb(p, q)


def test_mk_term_checks_constants_against_environment(env):
    assert mk_term("Const", "T", BOOL, env=env) == TRUE
    with pytest.raises(UnknownConstant):
        mk_term("Const", "missing", BOOL, env=env)
    with pytest.raises(TypeMismatch):
        mk_term("Const", "T", fun_type(BOOL, BOOL), env=env)


def test_environment_signature_errors(env):
    env.new_type("num", 0)
    with pytest.raises(Redefinition):
        env.new_type("num", 0)
    env.new_constant("zero", TyApp("num"))
    with pytest.raises(Redefinition):
        env.new_constant("zero", TyApp("num"))
    with pytest.raises(UnknownConstant):
        env.new_constant("bad", TyApp("real"))


def test_definitions(env):
    _, th = env.define("ID_TRUE", mk_eq(Abs(p, p), Abs(p, p)))
    assert th.provenance == Provenance.definition
    assert th.conclusion.fn.arg == Const("ID_TRUE", BOOL)
    with pytest.raises(FreeVariablesInDefinition):
        env.define("LOOSE", mk_eq(x, x))
    with pytest.raises(Redefinition):
        env.define("T", TRUE)


def test_axioms_carry_provenance(env):
    th = env.new_axiom("P_AX", mk_disj(p, mk_neg(p)))
    assert th.provenance == Provenance.axiom
    assert env.axiom("P_AX") is th
    with pytest.raises(Redefinition):
        env.new_axiom("P_AX", p)


def test_truth_and_conjunction_rules():
    assert derived.truth().conclusion == TRUE
    th = derived.CONJ(ASSUME(p), ASSUME(q))
    assert th.conclusion == mk_conj(p, q)
    assert derived.CONJUNCT1(th).conclusion == p
    assert derived.CONJUNCT2(th).conclusion == q
    assert set(th.hyps) == {p, q}


def test_discharge_and_modus_ponens():
    imp = derived.DISCH(p, ASSUME(p))
    assert imp.conclusion == mk_imp(p, p)
    assert imp.hyps == ()
    assert derived.MP(ASSUME(mk_imp(p, q)), ASSUME(p)).conclusion == q
    with pytest.raises(RuleMismatch):
        derived.MP(ASSUME(mk_imp(p, q)), ASSUME(q))


def test_classical_rules():
    em = derived.excluded_middle()
    assert em.provenance == Provenance.axiom
    contradiction = derived.MP(derived.NOT_ELIM(ASSUME(mk_neg(p))), ASSUME(p))
    assert contradiction.conclusion == FALSE
    th = derived.CCONTR(p, contradiction)
    assert th.conclusion == p
    assert not th.has_hyp(mk_neg(p))


def test_eqt_and_eqf():
    assert derived.EQT_INTRO(ASSUME(p)).conclusion == mk_eq(p, TRUE)
    assert derived.EQT_ELIM(derived.EQT_INTRO(ASSUME(p))).conclusion == p
    assert derived.EQF_INTRO(ASSUME(mk_neg(p))).conclusion == mk_eq(p, FALSE)


def _subterms(tm):
    yield tm
    if isinstance(tm, Comb):
        yield from _subterms(tm.fn)
        yield from _subterms(tm.arg)
    elif isinstance(tm, Abs):
        yield from _subterms(tm.body)


def test_random_derivations_never_prove_false(seed_registry, scaled):
    """Rules applied at random to the seed theorems never give |- F"""
    rng = np.random.default_rng(5)
    pool = [entry.theorem for entry in seed_registry]
    terms = [t for th in pool for t in _subterms(th.conclusion)]
    bools = [t for t in terms if t.ty == BOOL]
    unary = [
        derived.SYM, derived.CONJUNCT1, derived.CONJUNCT2, derived.SPEC_ALL, derived.UNDISCH,
        derived.EQT_INTRO, derived.EQT_ELIM, derived.EQF_INTRO, derived.EQF_ELIM, derived.NOT_ELIM,
    ]
    binary = [TRANS, EQ_MP, MK_COMB, DEDUCT_ANTISYM, derived.MP, derived.CONJ, derived.PROVE_HYP, derived.IMP_TRANS]

    def pick(items):
        return items[int(rng.integers(len(items)))]

    derivations = 0
    for _ in range(scaled(3_000, 30_000)):
        kind = int(rng.integers(6))
        try:
            if kind == 0:
                th = pick(unary)(pick(pool))
            elif kind == 1:
                th = pick(binary)(pick(pool), pick(pool))
            elif kind == 2:
                th = ASSUME(pick(bools))
            elif kind == 3:
                th = REFL(pick(terms))
            elif kind == 4:
                th = BETA(pick(terms))
            else:
                th = pick(pool)
                free = sorted(frees(th.conclusion), key=lambda v: v.name)
                same = [t for t in terms if free and t.ty == free[0].ty]
                if not same:
                    continue
                th = INST({free[0]: pick(same)}, th)
        except TacticForgeError:
            continue
        assert th.hyps or th.conclusion != FALSE
        derivations += 1
        if len(th.hyps) <= 2 and len(print_term(th.conclusion)) < 600:
            pool.append(th)
    assert derivations > 0
