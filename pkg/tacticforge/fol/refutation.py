"""
Kernel-checked refutation by a signed analytic tableau.

Each formula on a branch carries a theorem deriving it from the branch's
assumptions. Closing a branch yields a theorem with conclusion F; splitting
rules discharge their case assumptions with DISJ_CASES, CHOOSE or CCONTR, so
the final theorem depends only on the input theorems' hypotheses.

Universal quantifiers are instantiated only with the ground terms supplied
in `pools`, keyed by quantifier occurrence as assigned by clausification.
Without pools every quantified formula is treated as an atom, which makes
the procedure a decision method for the propositional structure.
"""
import logging

from typing import Sequence

from tacticforge.errors import KernelError
from tacticforge.fol.clausification import ClauseSet, Occurrence
from tacticforge.fol.first_order import FOApp, FOTerm, MissingWitness, to_higher_order
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
    EQF_INTRO,
    EXISTS,
    GEN,
    MP,
    NOT_ELIM,
    NOT_INTRO,
    SPEC,
    SYM,
    excluded_middle,
    truth,
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
from tacticforge.kernel.terms import TermExpr, Var, alpha_equal, dest_eq, frees_of_terms, is_eq, variant_name, vsubst
from tacticforge.kernel.theorem import ASSUME, DEDUCT_ANTISYM, EQ_MP, REFL, TRANS, Theorem
from tacticforge.sexpr.codec import alpha_key


logger = logging.getLogger(__name__)


class ReconstructionFailure(Exception):
    """The tableau saturated without closing a branch."""


class _Item:

    __slots__ = ("term", "theorem", "index", "path", "positive", "scope", "bindings", "expandable")

    def __init__(self, theorem: Theorem, index, path, positive, scope, bindings, expandable=True):
        self.term = theorem.conclusion
        self.theorem = theorem
        self.index = index
        self.path = path
        self.positive = positive
        self.scope = scope
        self.bindings = bindings
        self.expandable = expandable

    @property
    def core(self) -> TermExpr:
        return self.term if self.positive else dest_neg(self.term)

    @property
    def occurrence(self) -> Occurrence:
        return self.index, self.path, self.positive

    def child(self, theorem: Theorem, k: int, positive: bool, occurrence=None, value=None) -> "_Item":
        scope, bindings = self.scope, self.bindings
        if occurrence is not None:
            scope = scope + (occurrence,)
            bindings = {**bindings, occurrence: value}
        return _Item(theorem, self.index, self.path + (k,), positive, scope, bindings)


def _literal(theorem: Theorem) -> _Item:
    return _Item(theorem, None, (), True, (), {}, expandable=False)


class _Branch:

    def __init__(self):
        self.facts: dict[str, Theorem] = {}
        self.expanded: set[str] = set()
        self.queue: list[_Item] = []
        self.gammas: list[_Item] = []
        self.betas: list[_Item] = []
        self.used: set[tuple[str, FOApp]] = set()
        self.witnesses: dict[FOApp, Var] = {}

    def copy(self) -> "_Branch":
        other = _Branch()
        other.facts = dict(self.facts)
        other.expanded = set(self.expanded)
        other.queue = list(self.queue)
        other.gammas = list(self.gammas)
        other.betas = list(self.betas)
        other.used = set(self.used)
        other.witnesses = dict(self.witnesses)
        return other

    def has(self, tm: TermExpr) -> bool:
        return alpha_key(tm) in self.facts


class _Refuter:

    def __init__(self, theorems: Sequence[Theorem], clause_set: ClauseSet | None,
                 pools: dict[Occurrence, list[FOTerm]] | None, deadline):
        self.theorems = list(theorems)
        self.clause_set = clause_set
        self.pools = pools
        self.deadline = deadline
        terms = [th.conclusion for th in self.theorems] + [h for th in self.theorems for h in th.hyps]
        self.taken = {v.name for v in frees_of_terms(terms)}
        self.witness_vars: dict[FOApp, Var] = {}
        self.steps = 0

    @property
    def first_order(self) -> bool:
        return self.pools is not None and self.clause_set is not None

    def witness_var(self, key: FOApp, ty) -> Var:
        w = self.witness_vars.get(key)
        if w is None:
            name = variant_name(self.taken, f"_w{len(self.witness_vars)}")
            self.taken.add(name)
            w = Var(name, ty)
            self.witness_vars[key] = w
        return w

    def run(self) -> Theorem:
        branch = _Branch()
        for index, th in enumerate(self.theorems):
            branch.queue.append(_Item(th, index, (), True, (), {}))
        return self.refute(branch)

    def refute(self, branch: _Branch) -> Theorem:
        while True:
            self.steps += 1
            if self.deadline is not None:
                self.deadline.check()
            if branch.queue:
                closed = self.add(branch, branch.queue.pop(0))
                if closed is not None:
                    return closed
                continue
            if self.instantiate(branch):
                continue
            item = self.pick_beta(branch)
            if item is None:
                raise ReconstructionFailure(f"open branch after {self.steps} steps")
            return self.split(branch, item)

    # closure and classification

    def _closure(self, branch: _Branch, item: _Item) -> Theorem | None:
        tm, th = item.term, item.theorem
        if tm == FALSE:
            return th
        if is_neg(tm):
            body = dest_neg(tm)
            if body == TRUE:
                return MP(NOT_ELIM(th), truth())
            if is_eq(body):
                lhs, rhs = dest_eq(body)
                if alpha_equal(lhs, rhs):
                    return MP(NOT_ELIM(th), REFL(lhs))
            other = branch.facts.get(alpha_key(body))
            if other is not None:
                return MP(NOT_ELIM(th), other)
        else:
            other = branch.facts.get(alpha_key(mk_neg(tm)))
            if other is not None:
                return MP(NOT_ELIM(other), th)
        return None

    def add(self, branch: _Branch, item: _Item) -> Theorem | None:
        key = alpha_key(item.term)
        if key in branch.facts:
            if not item.expandable or key in branch.expanded:
                return None
        else:
            closed = self._closure(branch, item)
            if closed is not None:
                return closed
            branch.facts[key] = item.theorem
        if not item.expandable:
            return None
        branch.expanded.add(key)
        return self.expand(branch, item)

    def expand(self, branch: _Branch, item: _Item) -> Theorem | None:
        core, positive, th = item.core, item.positive, item.theorem

        if is_neg(core):
            body = dest_neg(core)
            if positive:
                branch.queue.append(item.child(th, 0, False))
            else:
                branch.queue.append(item.child(CCONTR(body, MP(NOT_ELIM(th), ASSUME(mk_neg(body)))), 0, True))
            return None

        if is_conj(core):
            if positive:
                branch.queue.append(item.child(CONJUNCT1(th), 0, True))
                branch.queue.append(item.child(CONJUNCT2(th), 1, True))
            else:
                branch.betas.append(item)
            return None

        if is_disj(core):
            if positive:
                branch.betas.append(item)
            else:
                p, q = dest_disj(core)
                not_p = NOT_INTRO(DISCH(p, MP(NOT_ELIM(th), DISJ1(ASSUME(p), q))))
                not_q = NOT_INTRO(DISCH(q, MP(NOT_ELIM(th), DISJ2(p, ASSUME(q)))))
                branch.queue.append(item.child(not_p, 0, False))
                branch.queue.append(item.child(not_q, 1, False))
            return None

        if is_imp(core):
            if positive:
                branch.betas.append(item)
            else:
                p, q = dest_imp(core)
                refuted = MP(NOT_ELIM(ASSUME(mk_neg(p))), ASSUME(p))
                p_th = CCONTR(p, MP(NOT_ELIM(th), DISCH(p, CONTR(q, refuted))))
                not_q = NOT_INTRO(DISCH(q, MP(NOT_ELIM(th), DISCH(p, ASSUME(q)))))
                branch.queue.append(item.child(p_th, 0, True))
                branch.queue.append(item.child(not_q, 1, False))
            return None

        if is_bool_eq(core):
            branch.betas.append(item)
            return None

        if self.first_order and (is_forall(core) or is_exists(core)):
            if is_forall(core) == positive:
                branch.gammas.append(item)
                return None
            return self.witness(branch, item)

        return None

    # quantifiers

    def witness(self, branch: _Branch, item: _Item) -> Theorem | None:
        core, th = item.core, item.theorem
        symbol = self.clause_set.skolem_symbol(item.occurrence, item.scope)
        if symbol is None:
            return None
        x, body = dest_exists(core) if item.positive else dest_forall(core)
        key = FOApp(symbol, tuple(item.bindings[u] for u in item.scope), x.ty)
        if key in branch.witnesses:
            return None
        w = self.witness_var(key, x.ty)
        branch.witnesses[key] = w
        instance = vsubst({x: w}, body)

        if item.positive:
            branch.queue.append(item.child(ASSUME(instance), 0, True))
            return CHOOSE(w, th, self.refute(branch))

        branch.queue.append(item.child(ASSUME(mk_neg(instance)), 0, False))
        generalized = GEN(w, CCONTR(instance, self.refute(branch)))
        return MP(NOT_ELIM(th), generalized)

    def instantiate(self, branch: _Branch) -> bool:
        progress = False
        for item in branch.gammas:
            occurrence = item.occurrence
            item_key = alpha_key(item.term)
            core, th = item.core, item.theorem
            x, body = dest_forall(core) if item.positive else dest_exists(core)
            for value in self.pools.get(occurrence, ()):
                if (item_key, value) in branch.used:
                    continue
                try:
                    t = to_higher_order(value, self.clause_set.signature, branch.witnesses)
                except MissingWitness:
                    continue
                branch.used.add((item_key, value))
                if t.ty != x.ty:
                    continue
                if item.positive:
                    instance_th = SPEC(t, th)
                else:
                    instance = vsubst({x: t}, body)
                    exists_th = EXISTS(core, t, ASSUME(instance))
                    instance_th = NOT_INTRO(DISCH(instance, MP(NOT_ELIM(th), exists_th)))
                branch.queue.append(item.child(instance_th, 0, item.positive, occurrence, value))
                progress = True
        return progress

    # branching

    @staticmethod
    def _alternatives(item: _Item) -> list[list[TermExpr]]:
        core = item.core
        if is_disj(core):
            p, q = dest_disj(core)
            return [[p], [q]]
        if is_imp(core):
            p, q = dest_imp(core)
            return [[mk_neg(p)], [q]]
        if is_conj(core):
            p, q = dest_conj(core)
            return [[mk_neg(p)], [mk_neg(q)]]
        p, q = dest_eq(core)
        if item.positive:
            return [[p, q], [mk_neg(p), mk_neg(q)]]
        return [[p, mk_neg(q)], [mk_neg(p), q]]

    def pick_beta(self, branch: _Branch) -> _Item | None:
        while branch.betas:
            item = branch.betas.pop(0)
            if not any(all(branch.has(tm) for tm in alt) for alt in self._alternatives(item)):
                return item
        return None

    def _case(self, branch: _Branch, items: list[_Item]) -> Theorem:
        case = branch.copy()
        case.queue[:0] = items
        return self.refute(case)

    def split(self, branch: _Branch, item: _Item) -> Theorem:
        core, th = item.core, item.theorem

        if is_disj(core):
            p, q = dest_disj(core)
            left = self._case(branch, [item.child(ASSUME(p), 0, True)])
            if not left.has_hyp(p):
                return left
            right = self._case(branch, [item.child(ASSUME(q), 1, True)])
            if not right.has_hyp(q):
                return right
            return DISJ_CASES(th, left, right)

        if is_imp(core):
            p, q = dest_imp(core)
            yes = [_literal(ASSUME(p)), item.child(MP(th, ASSUME(p)), 1, True)]
            no = [item.child(ASSUME(mk_neg(p)), 0, False)]
        elif is_conj(core):
            p, q = dest_conj(core)
            not_q = NOT_INTRO(DISCH(q, MP(NOT_ELIM(th), CONJ(ASSUME(p), ASSUME(q)))))
            yes = [_literal(ASSUME(p)), item.child(not_q, 1, False)]
            no = [item.child(ASSUME(mk_neg(p)), 0, False)]
        elif item.positive:
            p, q = dest_eq(core)
            not_p = ASSUME(mk_neg(p))
            not_q = NOT_INTRO(DISCH(q, MP(NOT_ELIM(not_p), EQ_MP(SYM(th), ASSUME(q)))))
            yes = [item.child(ASSUME(p), 0, True), item.child(EQ_MP(th, ASSUME(p)), 1, True)]
            no = [item.child(not_p, 0, False), item.child(not_q, 1, False)]
        else:
            p, q = dest_eq(core)
            not_q = NOT_INTRO(DISCH(q, MP(NOT_ELIM(th), DEDUCT_ANTISYM(ASSUME(p), ASSUME(q)))))
            both_false = TRANS(EQF_INTRO(ASSUME(mk_neg(p))), SYM(EQF_INTRO(ASSUME(mk_neg(q)))))
            q_th = CCONTR(q, MP(NOT_ELIM(th), both_false))
            yes = [item.child(ASSUME(p), 0, True), item.child(not_q, 1, False)]
            no = [item.child(ASSUME(mk_neg(p)), 0, False), item.child(q_th, 1, True)]

        on_p = self._case(branch, yes)
        if not on_p.has_hyp(p):
            return on_p
        on_not_p = self._case(branch, no)
        if not on_not_p.has_hyp(mk_neg(p)):
            return on_not_p
        return DISJ_CASES(SPEC(p, excluded_middle()), on_p, on_not_p)


def refute(
        theorems: Sequence[Theorem],
        clause_set: ClauseSet | None = None,
        pools: dict[Occurrence, list[FOTerm]] | None = None,
        deadline=None,
) -> Theorem:
    """
    Derive F from the conclusions of `theorems`.

    Returns:
        a theorem `A |- F` whose hypotheses come from the input theorems

    Raises:
        ReconstructionFailure: the formulas could not be refuted with the given instances
        DeadlineExceeded: the deadline passed
    """

    refuter = _Refuter(theorems, clause_set, pools, deadline)
    try:
        th = refuter.run()
    except KernelError as e:
        raise ReconstructionFailure(f"kernel rejected a reconstruction step: {e}") from e
    logger.debug(f"Refutation closed after {refuter.steps} steps")
    return th
