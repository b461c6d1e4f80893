"""
The bundled seed theory.

Three parts, in proof order: propositional tautologies (each stated with
free variables and universally closed), equality lemmas over a type
variable, and ground and schematic facts about Peano addition.
"""
import logging

from itertools import product
from typing import Callable

from tacticforge.data.theory_parsing import Declaration, DeclarationKind, ScriptStep, TheoryFile
from tacticforge.kernel.syntax import list_mk_forall, mk_conj, mk_disj, mk_iff, mk_imp, mk_neg
from tacticforge.kernel.terms import Comb, Const, TermExpr, Var, frees, list_mk_comb, mk_eq
from tacticforge.kernel.types import ALPHA, BOOL, TyApp, fun_type
from tacticforge.sexpr.codec import print_term, print_type


logger = logging.getLogger(__name__)


SEED_SOURCE = "<seed>"

NUM = TyApp("num")
ZERO = Const("0", NUM)
SUC = Const("SUC", fun_type(NUM, NUM))
PLUS = Const("+", fun_type(NUM, fun_type(NUM, NUM)))

p, q, r = Var("p", BOOL), Var("q", BOOL), Var("r", BOOL)


def _script(text: str) -> list[ScriptStep]:
    steps = []
    for chunk in text.split(";"):
        words = chunk.split()
        steps.append(ScriptStep(tactic=words[0], args=words[1:]))
    return steps


_STYLES = {
    "itaut": "ITAUT_TAC",
    "disch": "DISCH_TAC ; ITAUT_TAC",
    "conj": "CONJ_TAC ; ITAUT_TAC ; ITAUT_TAC",
    "eq": "EQ_TAC ; ITAUT_TAC ; ITAUT_TAC",
}

TAUTOLOGIES: list[tuple[str, str, Callable[[], TermExpr]]] = [
    ("IMP_REFL", "disch", lambda: mk_imp(p, p)),
    ("EXCLUDED_MIDDLE_P", "itaut", lambda: mk_disj(p, mk_neg(p))),
    ("NOT_AND_NOT", "itaut", lambda: mk_neg(mk_conj(p, mk_neg(p)))),
    ("NOT_NOT_ELIM", "disch", lambda: mk_imp(mk_neg(mk_neg(p)), p)),
    ("NOT_NOT_INTRO", "disch", lambda: mk_imp(p, mk_neg(mk_neg(p)))),
    ("AND_SWAP", "disch", lambda: mk_imp(mk_conj(p, q), mk_conj(q, p))),
    ("OR_SWAP", "disch", lambda: mk_imp(mk_disj(p, q), mk_disj(q, p))),
    ("AND_ELIM_L", "disch", lambda: mk_imp(mk_conj(p, q), p)),
    ("AND_ELIM_R", "disch", lambda: mk_imp(mk_conj(p, q), q)),
    ("OR_INTRO_L", "disch", lambda: mk_imp(p, mk_disj(p, q))),
    ("OR_INTRO_R", "disch", lambda: mk_imp(q, mk_disj(p, q))),
    ("CONTRAPOS", "disch", lambda: mk_imp(mk_imp(p, q), mk_imp(mk_neg(q), mk_neg(p)))),
    ("IMP_TRANS", "disch", lambda: mk_imp(mk_imp(p, q), mk_imp(mk_imp(q, r), mk_imp(p, r)))),
    ("AND_COMM", "eq", lambda: mk_iff(mk_conj(p, q), mk_conj(q, p))),
    ("OR_COMM", "eq", lambda: mk_iff(mk_disj(p, q), mk_disj(q, p))),
    ("IMP_CURRY", "eq", lambda: mk_iff(mk_imp(mk_conj(p, q), r), mk_imp(p, mk_imp(q, r)))),
    ("DE_MORGAN_AND", "eq", lambda: mk_iff(mk_neg(mk_conj(p, q)), mk_disj(mk_neg(p), mk_neg(q)))),
    ("DE_MORGAN_OR", "eq", lambda: mk_iff(mk_neg(mk_disj(p, q)), mk_conj(mk_neg(p), mk_neg(q)))),
    ("IMP_DISJ", "eq", lambda: mk_iff(mk_imp(p, q), mk_disj(mk_neg(p), q))),
    ("AND_OR_DISTRIB", "eq", lambda: mk_iff(
        mk_conj(p, mk_disj(q, r)), mk_disj(mk_conj(p, q), mk_conj(p, r))
    )),
    ("OR_AND_DISTRIB", "eq", lambda: mk_iff(
        mk_disj(p, mk_conj(q, r)), mk_conj(mk_disj(p, q), mk_disj(p, r))
    )),
    ("AND_ASSOC", "eq", lambda: mk_iff(mk_conj(mk_conj(p, q), r), mk_conj(p, mk_conj(q, r)))),
    ("OR_ASSOC", "eq", lambda: mk_iff(mk_disj(mk_disj(p, q), r), mk_disj(p, mk_disj(q, r)))),
    ("AND_IDEM", "eq", lambda: mk_iff(mk_conj(p, p), p)),
    ("OR_IDEM", "eq", lambda: mk_iff(mk_disj(p, p), p)),
    ("NOT_NOT", "eq", lambda: mk_iff(mk_neg(mk_neg(p)), p)),
    ("IFF_INTRO", "disch", lambda: mk_imp(mk_conj(mk_imp(p, q), mk_imp(q, p)), mk_iff(p, q))),
    ("IFF_MP", "disch", lambda: mk_imp(mk_iff(p, q), mk_imp(p, q))),
    ("IFF_SYM", "eq", lambda: mk_iff(mk_iff(p, q), mk_iff(q, p))),
    ("IMP_CONJ_DISTRIB", "eq", lambda: mk_iff(
        mk_imp(p, mk_conj(q, r)), mk_conj(mk_imp(p, q), mk_imp(p, r))
    )),
    ("DISJ_IMP_DISTRIB", "eq", lambda: mk_iff(
        mk_imp(mk_disj(p, q), r), mk_conj(mk_imp(p, r), mk_imp(q, r))
    )),
    ("PEIRCE", "disch", lambda: mk_imp(mk_imp(mk_imp(p, q), p), p)),
    ("IMP_TOTAL", "itaut", lambda: mk_disj(mk_imp(p, q), mk_imp(q, p))),
    ("IMP_WEAKEN", "disch", lambda: mk_imp(p, mk_imp(q, p))),
    ("IMP_DISTRIB", "disch", lambda: mk_imp(
        mk_imp(p, mk_imp(q, r)), mk_imp(mk_imp(p, q), mk_imp(p, r))
    )),
    ("AND_CHAIN", "disch", lambda: mk_imp(mk_conj(mk_conj(p, q), mk_imp(q, r)), r)),
    ("EX_FALSO", "disch", lambda: mk_imp(mk_neg(p), mk_imp(p, q))),
    ("DISJ_SYLLOGISM", "disch", lambda: mk_imp(mk_conj(mk_disj(p, q), mk_neg(p)), q)),
    ("IMP_CONJ_INTRO", "disch", lambda: mk_imp(
        mk_conj(mk_imp(p, q), mk_imp(p, r)), mk_imp(p, mk_conj(q, r))
    )),
    ("DISJ_CASES_IMP", "disch", lambda: mk_imp(
        mk_conj(mk_imp(p, r), mk_imp(q, r)), mk_imp(mk_disj(p, q), r)
    )),
    ("MODUS_PONENS", "disch", lambda: mk_imp(mk_conj(p, mk_imp(p, q)), q)),
    ("CASES_IMP", "disch", lambda: mk_imp(mk_conj(mk_imp(p, q), mk_imp(mk_neg(p), q)), q)),
    ("IMP_REFL_BOTH", "conj", lambda: mk_conj(mk_imp(p, p), mk_imp(q, q))),
    ("LEM_NONCONTRA", "conj", lambda: mk_conj(mk_disj(p, mk_neg(p)), mk_neg(mk_conj(q, mk_neg(q))))),
    ("AND_ELIMS", "conj", lambda: mk_conj(mk_imp(mk_conj(p, q), p), mk_imp(mk_conj(p, q), q))),
    ("OR_INTROS", "conj", lambda: mk_conj(mk_imp(p, mk_disj(p, q)), mk_imp(q, mk_disj(p, q)))),
]


def _ordered_frees(tm: TermExpr) -> list[Var]:
    return sorted(frees(tm), key=lambda v: v.name)


def _theorem(name: str, statement: TermExpr, script: str) -> Declaration:
    return Declaration(
        kind=DeclarationKind.theorem, name=name, text=print_term(statement), script=_script(script)
    )


def _generalized(statement: TermExpr, script: str) -> tuple[TermExpr, str]:
    vs = _ordered_frees(statement)
    return list_mk_forall(vs, statement), " ; ".join(["GEN_TAC"] * len(vs) + [script])


def propositional_part() -> list[Declaration]:
    declarations = []
    for name, style, build in TAUTOLOGIES:
        statement = build()
        declarations.append(_theorem(name, statement, _STYLES[style]))
        closed, script = _generalized(statement, _STYLES[style])
        declarations.append(_theorem(f"{name}_ALL", closed, script))
    return declarations


def equality_part() -> list[Declaration]:
    x, y, z, w = (Var(n, ALPHA) for n in ("x", "y", "z", "w"))
    f, g = Var("f", fun_type(ALPHA, ALPHA)), Var("g", fun_type(ALPHA, ALPHA))
    lemmas = [
        ("EQ_REFL_ALL", [x], mk_eq(x, x), "REFL_TAC"),
        ("EQ_SYM", [x, y], mk_imp(mk_eq(x, y), mk_eq(y, x)), "DISCH_TAC ; ASM_REWRITE_TAC"),
        ("EQ_TRANS", [x, y, z], mk_imp(mk_eq(x, y), mk_imp(mk_eq(y, z), mk_eq(x, z))),
         "DISCH_TAC ; DISCH_TAC ; ASM_REWRITE_TAC"),
        ("EQ_SYM_EQ", [x, y], mk_iff(mk_eq(x, y), mk_eq(y, x)),
         "EQ_TAC ; DISCH_TAC ; ASM_REWRITE_TAC ; DISCH_TAC ; ASM_REWRITE_TAC"),
        ("AP_TERM_EQ", [f, x, y], mk_imp(mk_eq(x, y), mk_eq(Comb(f, x), Comb(f, y))),
         "DISCH_TAC ; ASM_REWRITE_TAC"),
        ("AP_THM_EQ", [f, g, x], mk_imp(mk_eq(f, g), mk_eq(Comb(f, x), Comb(g, x))),
         "DISCH_TAC ; ASM_REWRITE_TAC"),
        ("EQ_TRANS3", [w, x, y, z],
         mk_imp(mk_eq(w, x), mk_imp(mk_eq(x, y), mk_imp(mk_eq(y, z), mk_eq(w, z)))),
         "DISCH_TAC ; DISCH_TAC ; DISCH_TAC ; ASM_REWRITE_TAC"),
        ("AP_TERM_TWICE", [f, x, y],
         mk_imp(mk_eq(x, y), mk_eq(Comb(f, Comb(f, x)), Comb(f, Comb(f, y)))),
         "DISCH_TAC ; ASM_REWRITE_TAC"),
    ]
    declarations = []
    for name, vs, body, script in lemmas:
        declarations.append(_theorem(
            name, list_mk_forall(vs, body), " ; ".join(["GEN_TAC"] * len(vs) + [script])
        ))
    return declarations


def numeral(k: int, base: TermExpr = ZERO) -> TermExpr:
    tm = base
    for _ in range(k):
        tm = Comb(SUC, tm)
    return tm


def plus(a: TermExpr, b: TermExpr) -> TermExpr:
    return list_mk_comb(PLUS, [a, b])


def arithmetic_part(ground_max: int = 5, triple_max: int = 2) -> list[Declaration]:
    m, n = Var("m", NUM), Var("n", NUM)
    declarations = [
        Declaration(kind=DeclarationKind.type, name="num", arity=0),
        Declaration(kind=DeclarationKind.const, name="0", text=print_type(NUM)),
        Declaration(kind=DeclarationKind.const, name="SUC", text=print_type(SUC.ty)),
        Declaration(kind=DeclarationKind.const, name="+", text=print_type(PLUS.ty)),
        Declaration(kind=DeclarationKind.axiom, name="ADD_0",
                    text=print_term(list_mk_forall([n], mk_eq(plus(ZERO, n), n)))),
        Declaration(kind=DeclarationKind.axiom, name="ADD_SUC", text=print_term(list_mk_forall(
            [m, n], mk_eq(plus(Comb(SUC, m), n), Comb(SUC, plus(m, n)))
        ))),
        Declaration(kind=DeclarationKind.axiom, name="SUC_INJ", text=print_term(list_mk_forall(
            [m, n], mk_imp(mk_eq(Comb(SUC, m), Comb(SUC, n)), mk_eq(m, n))
        ))),
        Declaration(kind=DeclarationKind.axiom, name="NOT_SUC",
                    text=print_term(list_mk_forall([n], mk_neg(mk_eq(Comb(SUC, n), ZERO))))),
        Declaration(kind=DeclarationKind.definition, name="ONE", text=print_term(numeral(1))),
        Declaration(kind=DeclarationKind.definition, name="TWO",
                    text=print_term(Comb(SUC, Const("ONE", NUM)))),
        Declaration(kind=DeclarationKind.definition, name="THREE",
                    text=print_term(Comb(SUC, Const("TWO", NUM)))),
    ]

    for a, b in product(range(ground_max + 1), repeat=2):
        declarations.append(_theorem(
            f"ADD_{a}_{b}", mk_eq(plus(numeral(a), numeral(b)), numeral(a + b)), "REWRITE_TAC ADD_0 ADD_SUC"
        ))
    for a, b, c in product(range(triple_max + 1), repeat=3):
        declarations.append(_theorem(
            f"ADD3_{a}_{b}_{c}",
            mk_eq(plus(plus(numeral(a), numeral(b)), numeral(c)), numeral(a + b + c)),
            f"REWRITE_TAC ADD_{a}_{b} ADD_0 ADD_SUC",
        ))
    for k in range(1, ground_max + 1):
        declarations.append(_theorem(
            f"ADD_LEFT_{k}",
            list_mk_forall([n], mk_eq(plus(numeral(k), n), numeral(k, n))),
            "GEN_TAC ; REWRITE_TAC ADD_0 ADD_SUC",
        ))
    for k in range(1, ground_max + 2):
        declarations.append(_theorem(
            f"NOT_SUC_{k}", mk_neg(mk_eq(numeral(k), ZERO)), "REWRITE_TAC NOT_SUC"
        ))

    one, two, three = Const("ONE", NUM), Const("TWO", NUM), Const("THREE", NUM)
    for name, lhs, rhs in [
        ("ONE_ADD_ONE", plus(one, one), two),
        ("ONE_ADD_TWO", plus(one, two), three),
        ("TWO_ADD_ONE", plus(two, one), three),
        ("TWO_ADD_TWO", plus(two, two), Comb(SUC, three)),
    ]:
        declarations.append(_theorem(
            name, mk_eq(lhs, rhs), "REWRITE_TAC ONE_DEF TWO_DEF THREE_DEF ADD_0 ADD_SUC"
        ))

    declarations.append(_theorem(
        "SUC_INJ2",
        list_mk_forall([m, n], mk_imp(mk_eq(numeral(2, m), numeral(2, n)), mk_eq(m, n))),
        "GEN_TAC ; GEN_TAC ; DISCH_TAC ; MATCH_MP_TAC SUC_INJ ; MATCH_MP_TAC SUC_INJ ; ASM_REWRITE_TAC",
    ))
    declarations.append(_theorem(
        "SUC_INJ3",
        list_mk_forall([m, n], mk_imp(mk_eq(numeral(3, m), numeral(3, n)), mk_eq(m, n))),
        "GEN_TAC ; GEN_TAC ; DISCH_TAC ; MATCH_MP_TAC SUC_INJ2 ; MATCH_MP_TAC SUC_INJ ; ASM_REWRITE_TAC",
    ))
    return declarations


def seed_theory() -> TheoryFile:
    declarations = propositional_part() + equality_part() + arithmetic_part()
    theory = TheoryFile(declarations=declarations, source=SEED_SOURCE)
    logger.debug(f"Seed theory has {len(theory.theorems())} theorems")
    return theory
