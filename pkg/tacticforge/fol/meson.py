"""
Model elimination backed by kernel reconstruction.

The connection tableau finds which instances of which quantified formulas
close the refutation; the kernel-level tableau then rebuilds the refutation
from those instances alone.
"""
import logging

from typing import Sequence

from tacticforge.errors import NotFirstOrderizable, TacticFailure, TypeMismatch
from tacticforge.fol.clausification import ClauseSet, Occurrence, refutation_theorems
from tacticforge.fol.first_order import FOApp, FOTerm, FOVar, Signature
from tacticforge.fol.refutation import ReconstructionFailure, refute
from tacticforge.fol.tableau import DEFAULT_MAX_DEPTH, TableauOutcome, TableauResult, tableau_prove
from tacticforge.fol.unification import apply_substitution
from tacticforge.kernel.derived import CCONTR
from tacticforge.kernel.terms import Abs, Comb, Const, TermExpr, type_vars_in_term
from tacticforge.kernel.theorem import INST_TYPE, Theorem
from tacticforge.kernel.types import type_match
from tacticforge.sexpr.codec import alpha_key
from tacticforge.tactics.goal import Goal


logger = logging.getLogger(__name__)


MAX_TYPE_INSTANCES = 4


def _constants(tm: TermExpr, acc: list[Const]) -> list[Const]:
    if isinstance(tm, Const):
        acc.append(tm)
    elif isinstance(tm, Comb):
        _constants(tm.fn, acc)
        _constants(tm.arg, acc)
    elif isinstance(tm, Abs):
        _constants(tm.body, acc)
    return acc


def type_instances(theorems: Sequence[Theorem], targets: Sequence[TermExpr]) -> list[Theorem]:
    """
    Add monomorphic copies of polymorphic theorems, instantiating their type
    variables so that their constants match constants used in `targets`.
    """

    used: dict[str, list] = {}
    for tm in targets:
        for c in _constants(tm, []):
            types = used.setdefault(c.name, [])
            if c.ty not in types:
                types.append(c.ty)

    result = []
    for th in theorems:
        result.append(th)
        tyvars = type_vars_in_term(th.conclusion)
        if not tyvars or any(type_vars_in_term(h) for h in th.hyps):
            continue
        seen = {alpha_key(th.conclusion)}
        for c in _constants(th.conclusion, []):
            for ty in used.get(c.name, ()):
                if len(seen) > MAX_TYPE_INSTANCES:
                    break
                try:
                    tyinst = type_match(c.ty, ty, {})
                except TypeMismatch:
                    continue
                if not tyinst or set(tyinst) != tyvars:
                    continue
                instance = INST_TYPE(tyinst, th)
                key = alpha_key(instance.conclusion)
                if key not in seen:
                    seen.add(key)
                    result.append(instance)
    return result


def _ground(term: FOTerm, signature: Signature) -> FOApp:
    if isinstance(term, FOVar):
        return signature.default_term(term.ty)
    return FOApp(term.symbol, tuple(_ground(arg, signature) for arg in term.args), term.ty)


def instance_pools(result: TableauResult, clause_set: ClauseSet) -> dict[Occurrence, list[FOApp]]:
    """Ground instances each universal quantifier occurrence takes in a tableau proof."""

    pools: dict[Occurrence, list[FOApp]] = {}
    for step in result.steps:
        for var, renamed in step.renaming.items():
            occurrence = clause_set.occurrence_of[var]
            value = _ground(apply_substitution(result.substitution, renamed), clause_set.signature)
            bucket = pools.setdefault(occurrence, [])
            if value not in bucket:
                bucket.append(value)
    return pools


def meson(
        goal: Goal,
        theorems: Sequence[Theorem],
        use_hyps: bool = True,
        max_depth: int = DEFAULT_MAX_DEPTH,
        deadline=None,
) -> Theorem:
    """
    Prove the goal by first-order refutation.

    Args:
        goal: goal to prove
        theorems: axioms supplied as tactic arguments
        use_hyps: also assume the goal's hypotheses
        max_depth: largest tableau depth searched
        deadline: optional Deadline

    Returns:
        a theorem for the goal's conclusion with hypotheses among the goal's

    Raises:
        TacticFailure: not first-order, no proof within max_depth, or reconstruction failed
        DeadlineExceeded: the deadline passed
    """

    targets = list(goal.hyps) + [goal.conclusion] + [th.conclusion for th in theorems]
    axioms = type_instances(theorems, targets)
    try:
        clause_set = ClauseSet(refutation_theorems(goal, axioms, use_hyps))
    except NotFirstOrderizable as e:
        raise TacticFailure(f"not first-order: {e}") from e

    result = tableau_prove(clause_set.clauses, max_depth, deadline)
    if result.outcome == TableauOutcome.timeout:
        deadline.check()
        raise TacticFailure("search interrupted")
    if result.outcome == TableauOutcome.exhausted:
        raise TacticFailure(f"no proof within depth {max_depth}")

    pools = instance_pools(result, clause_set)
    logger.debug(
        f"Tableau proof at depth {result.depth} with {len(result.steps)} clause uses, "
        f"{sum(len(v) for v in pools.values())} instances"
    )
    try:
        refutation = refute(clause_set.theorems, clause_set, pools, deadline)
    except ReconstructionFailure as e:
        raise TacticFailure(f"reconstruction failed: {e}") from e
    return CCONTR(goal.conclusion, refutation)
