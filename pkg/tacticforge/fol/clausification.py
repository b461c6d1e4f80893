"""
Conversion of a refutation problem into clauses.

Every quantifier occurrence is identified by the formula it belongs to, its
path in that formula's syntax tree and the polarity it is reached with. The
same keys are used when a first-order proof is replayed through the kernel,
so the ground instances found by the search can be traced back to the
quantifiers that produced them.
"""
import logging

from typing import Sequence

from tacticforge.errors import NotFirstOrderizable
from tacticforge.fol.first_order import (
    Clause,
    FOApp,
    FOTerm,
    FOVar,
    Literal,
    Signature,
    to_first_order,
)
from tacticforge.kernel.syntax import (
    FALSE,
    TRUE,
    dest_conj,
    dest_disj,
    dest_exists,
    dest_forall,
    dest_imp,
    dest_neg,
    is_bool_eq,
    is_conj,
    is_disj,
    is_exists,
    is_forall,
    is_imp,
    is_neg,
    mk_neg,
)
from tacticforge.kernel.terms import TermExpr, Var, dest_eq
from tacticforge.kernel.theorem import ASSUME, Theorem
from tacticforge.tactics.goal import Goal


logger = logging.getLogger(__name__)


MAX_CLAUSES = 2_000

Path = tuple[int, ...]
Occurrence = tuple[int, Path, bool]
Scope = tuple[Occurrence, ...]

_TRUE = ("true",)
_FALSE = ("false",)


def _and(a, b):
    if a == _FALSE or b == _FALSE:
        return _FALSE
    if a == _TRUE:
        return b
    if b == _TRUE:
        return a
    return ("and", a, b)


def _or(a, b):
    if a == _TRUE or b == _TRUE:
        return _TRUE
    if a == _FALSE:
        return b
    if b == _FALSE:
        return a
    return ("or", a, b)


class ClauseSet:
    """
    Clauses of a refutation problem together with what is needed to replay
    a proof found over them.

    Attributes:
        theorems: one theorem per input formula, its conclusion being the formula
        clauses: clauses in input order (axioms, hypotheses, negated conclusion)
        signature: symbol table for translating ground terms back
        universals: clause variable of each universal quantifier occurrence
        skolems: Skolem symbol of each existential occurrence, keyed with the
            universal occurrences in scope
    """

    def __init__(self, theorems: Sequence[Theorem]):
        self.theorems = list(theorems)
        self.clauses: list[Clause] = []
        self.signature = Signature()
        self.universals: dict[Occurrence, FOVar] = {}
        self.skolems: dict[tuple[Occurrence, Scope], str] = {}
        self.occurrence_of: dict[FOVar, Occurrence] = {}

        for index, th in enumerate(self.theorems):
            tree = self._nnf(th.conclusion, True, index, (), {}, ())
            for literals in self._cnf(tree):
                self.clauses.append(Clause(literals, index))
                if len(self.clauses) > MAX_CLAUSES:
                    raise NotFirstOrderizable(f"more than {MAX_CLAUSES} clauses")
        logger.debug(f"Clausified {len(self.theorems)} formulas into {len(self.clauses)} clauses")

    def _universal(self, occurrence: Occurrence, v: Var) -> FOVar:
        var = self.universals.get(occurrence)
        if var is None:
            var = FOVar(f"_u{len(self.universals)}", v.ty)
            self.universals[occurrence] = var
            self.occurrence_of[var] = occurrence
        return var

    def skolem_symbol(self, occurrence: Occurrence, scope: Scope) -> str | None:
        return self.skolems.get((occurrence, scope))

    def _nnf(self, tm: TermExpr, positive: bool, index: int, path: Path,
             env: dict[Var, FOTerm], scope: Scope):
        if is_neg(tm):
            return self._nnf(dest_neg(tm), not positive, index, path + (0,), env, scope)
        if tm == TRUE:
            return _TRUE if positive else _FALSE
        if tm == FALSE:
            return _FALSE if positive else _TRUE

        def sub(child, pol, k):
            return self._nnf(child, pol, index, path + (k,), env, scope)

        if is_conj(tm):
            p, q = dest_conj(tm)
            join = _and if positive else _or
            return join(sub(p, positive, 0), sub(q, positive, 1))
        if is_disj(tm):
            p, q = dest_disj(tm)
            join = _or if positive else _and
            return join(sub(p, positive, 0), sub(q, positive, 1))
        if is_imp(tm):
            p, q = dest_imp(tm)
            join = _or if positive else _and
            return join(sub(p, not positive, 0), sub(q, positive, 1))
        if is_bool_eq(tm):
            p, q = dest_eq(tm)
            if positive:
                return _or(_and(sub(p, True, 0), sub(q, True, 1)), _and(sub(p, False, 0), sub(q, False, 1)))
            return _or(_and(sub(p, True, 0), sub(q, False, 1)), _and(sub(p, False, 0), sub(q, True, 1)))
        if is_forall(tm) or is_exists(tm):
            v, body = dest_forall(tm) if is_forall(tm) else dest_exists(tm)
            occurrence = (index, path, positive)
            if is_forall(tm) == positive:
                var = self._universal(occurrence, v)
                return self._nnf(body, positive, index, path + (0,), {**env, v: var}, scope + (occurrence,))
            symbol = self.skolems.get((occurrence, scope))
            if symbol is None:
                symbol = self.signature.new_skolem()
                self.skolems[(occurrence, scope)] = symbol
            args = tuple(self.universals[u] for u in scope)
            witness = FOApp(symbol, args, v.ty)
            return self._nnf(body, positive, index, path + (0,), {**env, v: witness}, scope)

        atom = to_first_order(tm, env, self.signature)
        if isinstance(atom, FOVar):
            raise NotFirstOrderizable("a quantified boolean variable is used as a formula")
        return ("lit", Literal(positive, atom))

    def _cnf(self, tree) -> list[tuple[Literal, ...]]:
        kind = tree[0]
        if kind == "true":
            return []
        if kind == "false":
            return [()]
        if kind == "lit":
            return [(tree[1],)]
        if kind == "and":
            return self._cnf(tree[1]) + self._cnf(tree[2])
        left, right = self._cnf(tree[1]), self._cnf(tree[2])
        if len(left) * len(right) > MAX_CLAUSES:
            raise NotFirstOrderizable(f"more than {MAX_CLAUSES} clauses")
        clauses = []
        for a in left:
            for b in right:
                merged = _merge(a, b)
                if merged is not None:
                    clauses.append(merged)
        return clauses


def _merge(a: tuple[Literal, ...], b: tuple[Literal, ...]) -> tuple[Literal, ...] | None:
    """Disjunction of two clauses without duplicates, or None for a tautology."""

    merged = list(a)
    for lit in b:
        if lit not in merged:
            merged.append(lit)
    present = set(merged)
    if any(lit.negate() in present for lit in merged):
        return None
    return tuple(merged)


def refutation_theorems(goal: Goal, axioms: Sequence[Theorem], use_hyps: bool = True) -> list[Theorem]:
    """Axioms, then assumed hypotheses, then the assumed negated conclusion."""

    theorems = list(axioms)
    if use_hyps:
        theorems.extend(ASSUME(h) for h in goal.hyps)
    theorems.append(ASSUME(mk_neg(goal.conclusion)))
    return theorems


def clausify(goal: Goal, axioms: Sequence[Theorem], use_hyps: bool = True) -> ClauseSet:
    return ClauseSet(refutation_theorems(goal, axioms, use_hyps))
