from itertools import product

import numpy as np
import pytest

from tacticforge.errors import Clash, OccursCheck, TacticFailure, UnificationError
from tacticforge.fol.clausification import clausify
from tacticforge.fol.first_order import Clause, FOApp, FOVar, Literal, term_variables
from tacticforge.fol.meson import meson
from tacticforge.fol.refutation import ReconstructionFailure, refute
from tacticforge.fol.tableau import TableauOutcome, tableau_prove
from tacticforge.fol.unification import apply_substitution, unify
from tacticforge.kernel.syntax import FALSE, mk_conj, mk_disj, mk_exists, mk_forall, mk_imp, mk_neg
from tacticforge.kernel.terms import Comb, Var
from tacticforge.kernel.theorem import ASSUME
from tacticforge.kernel.types import ALPHA, BOOL, fun_type
from tacticforge.tactics.goal import Goal, proves


X = FOVar("X", ALPHA)
Y = FOVar("Y", ALPHA)
a = FOApp("a")
b = FOApp("b")


def f(*args):
    return FOApp("f", args)


def P(arg):
    return FOApp("P", (arg,))


def Q(arg):
    return FOApp("Q", (arg,))


# higher-order counterparts
pred = fun_type(ALPHA, BOOL)
p_ = Var("P", pred)
q_ = Var("Q", pred)
x_ = Var("x", ALPHA)
c_ = Var("c", ALPHA)


def test_unify_binds_variables():
    sigma = unify(f(X, f(Y)), f(a, f(b)))
    assert apply_substitution(sigma, X) == a
    assert apply_substitution(sigma, Y) == b


def test_unify_is_idempotent():
    sigma = unify(f(X, Y), f(Y, a))
    assert apply_substitution(sigma, X) == a
    assert apply_substitution(sigma, Y) == a


def test_unify_errors():
    with pytest.raises(OccursCheck):
        unify(X, f(X))
    with pytest.raises(Clash):
        unify(f(a), f(b))
    with pytest.raises(Clash):
        unify(f(a), f(a, b))


def test_literal_negation():
    lit = Literal(True, P(a))
    assert lit.negate() == Literal(False, P(a))
    assert lit.negate().negate() == lit


def test_tableau_finds_chained_proof():
    clauses = [
        Clause((Literal(True, P(a)),), 0),
        Clause((Literal(False, P(X)), Literal(True, Q(X))), 1),
        Clause((Literal(False, Q(a)),), 2),
    ]
    result = tableau_prove(clauses)
    assert result.found
    assert result.depth == 2
    assert {step.clause_index for step in result.steps} == {0, 1, 2}


def test_tableau_exhausts_on_satisfiable_clauses():
    clauses = [Clause((Literal(True, P(a)),), 0), Clause((Literal(False, P(b)),), 1)]
    result = tableau_prove(clauses, max_depth=4)
    assert result.outcome == TableauOutcome.exhausted


def test_tableau_empty_clause_is_immediate():
    result = tableau_prove([Clause((), 0)])
    assert result.found
    assert result.depth == 1


def test_tableau_rejects_zero_depth():
    with pytest.raises(ValueError):
        tableau_prove([], max_depth=0)


def test_clausify_orders_sources():
    """Axioms come first, the negated conclusion last"""
    p, q = Var("p", BOOL), Var("q", BOOL)
    axiom = ASSUME(mk_disj(p, q))
    clause_set = clausify(Goal([p], q), [axiom])
    assert [c.source for c in clause_set.clauses] == [0, 1, 2]
    assert len(clause_set.clauses[0].literals) == 2


def test_refute_propositional_contradiction():
    p, q = Var("p", BOOL), Var("q", BOOL)
    theorems = [ASSUME(mk_conj(p, mk_imp(p, q))), ASSUME(mk_neg(q))]
    th = refute(theorems)
    assert th.conclusion == FALSE
    assert set(th.hyps) <= {mk_conj(p, mk_imp(p, q)), mk_neg(q)}

    with pytest.raises(ReconstructionFailure):
        refute([ASSUME(p)])


def test_meson_chains_through_universal():
    rule = mk_forall(x_, mk_imp(Comb(p_, x_), Comb(q_, x_)))
    goal = Goal([rule, Comb(p_, c_)], Comb(q_, c_))
    th = meson(goal, [])
    assert proves(th, goal)


def test_meson_proves_existential_from_instance():
    goal = Goal([Comb(p_, c_)], mk_exists(x_, Comb(p_, x_)))
    assert proves(meson(goal, []), goal)


def test_meson_without_hypotheses_fails():
    rule = mk_forall(x_, mk_imp(Comb(p_, x_), Comb(q_, x_)))
    goal = Goal([rule, Comb(p_, c_)], Comb(q_, c_))
    with pytest.raises(TacticFailure):
        meson(goal, [], use_hyps=False, max_depth=4)


def test_meson_uses_axiom_arguments():
    rule = ASSUME(mk_forall(x_, mk_imp(Comb(p_, x_), Comb(q_, x_))))
    goal = Goal([rule.conclusion, Comb(p_, c_)], Comb(q_, c_))
    th = meson(goal, [rule], use_hyps=False)
    assert proves(th, goal)


Z = FOVar("Z", ALPHA)
ATOM_ARGS = [a, b, X, Y]
GROUND_PICKS = [a, b, FOApp("g", (a,)), f(a, b)]


def R(s, t):
    return FOApp("R", (s, t))


def _random_clause_set(rng, max_clauses, max_literals):
    def arg():
        return ATOM_ARGS[int(rng.choice(4, p=[0.375, 0.375, 0.125, 0.125]))]

    clauses = []
    for source in range(int(rng.integers(1, max_clauses + 1))):
        literals = []
        for _ in range(int(rng.integers(1, max_literals + 1))):
            atom = P(arg()) if rng.random() < 0.5 else R(arg(), arg())
            literals.append(Literal(bool(rng.random() < 0.5), atom))
        clauses.append(Clause(tuple(literals), source))
    return clauses


def _satisfiable(clauses):
    ground = []
    for clause in clauses:
        for x_val, y_val in product([a, b], repeat=2):
            theta = {X: x_val, Y: y_val}
            ground.append([(lit.positive, apply_substitution(theta, lit.atom)) for lit in clause.literals])
    atoms = sorted({atom for lits in ground for _, atom in lits}, key=repr)
    for values in product([False, True], repeat=len(atoms)):
        model = dict(zip(atoms, values))
        if all(any(model[atom] == positive for positive, atom in lits) for lits in ground):
            return True
    return False


def test_tableau_agrees_with_truth_tables(scaled):
    """On small clause sets over two constants the search finds a proof exactly when no model exists"""
    rng = np.random.default_rng(5)
    max_clauses, max_literals = scaled((4, 2), (6, 3))
    unsat = 0
    for _ in range(scaled(150, 1_000)):
        clauses = _random_clause_set(rng, max_clauses, max_literals)
        expected_unsat = not _satisfiable(clauses)
        result = tableau_prove(clauses, max_depth=7)
        assert result.outcome != TableauOutcome.timeout
        assert result.found == expected_unsat, clauses
        unsat += expected_unsat
    assert unsat > 0


def _random_term(rng, budget):
    """A term of at most `budget` nodes over f/2, g/1, a, b, X, Y, Z"""
    roll = rng.random()
    if budget >= 3 and roll < 0.3:
        left = _random_term(rng, budget - 2)
        return f(left, _random_term(rng, budget - 1 - _size(left)))
    if budget >= 2 and roll < 0.5:
        return FOApp("g", (_random_term(rng, budget - 1),))
    return [a, b, X, Y, Z][int(rng.integers(0, 5))]


def _size(term):
    if isinstance(term, FOVar):
        return 1
    return 1 + sum(_size(arg) for arg in term.args)


def test_unifiers_are_most_general(scaled):
    rng = np.random.default_rng(6)
    groundings = [dict(zip((X, Y, Z), values)) for values in product(GROUND_PICKS, repeat=3)]
    unified = failed = 0
    for _ in range(scaled(300, 3_000)):
        s, t = _random_term(rng, 6), _random_term(rng, 6)
        assert _size(s) <= 6 and _size(t) <= 6
        solutions = [theta for theta in groundings if apply_substitution(theta, s) == apply_substitution(theta, t)]
        try:
            sigma = unify(s, t)
        except UnificationError:
            assert solutions == [], (s, t)
            failed += 1
            continue
        unified += 1
        assert apply_substitution(sigma, s) == apply_substitution(sigma, t)
        for value in sigma.values():
            assert not term_variables(value) & set(sigma)
        for theta in solutions:
            for v in (X, Y, Z):
                assert apply_substitution(theta, apply_substitution(sigma, v)) == apply_substitution(theta, v)
    assert unified > 0 and failed > 0
