"""
Connection tableau search in the style of leanCoP.

The search starts from each all-positive clause and closes every open literal
either by a reduction step (unification with a complementary literal on the
current path) or by an extension step (unification with a complementary
literal of a fresh copy of an input clause). The path length is bounded and
the bound is deepened iteratively.
"""
import logging

from enum import Enum
from typing import Iterator, NamedTuple, Sequence

from pydantic import BaseModel, ConfigDict

from tacticforge.errors import DeadlineExceeded, UnificationError
from tacticforge.fol.first_order import Clause, FOVar, Literal
from tacticforge.fol.unification import Substitution, apply_substitution, unify


logger = logging.getLogger(__name__)


DEFAULT_MAX_DEPTH = 12
_DEADLINE_CHECK_INTERVAL = 256


class ExtensionStep(NamedTuple):
    """One use of an input clause, with the fresh names its variables got."""

    clause_index: int
    renaming: dict[FOVar, FOVar]


class TableauOutcome(str, Enum):
    proof = "PROOF"
    exhausted = "EXHAUSTED"
    timeout = "TIMEOUT"


class TableauResult(BaseModel):

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    outcome: TableauOutcome
    depth: int = 0
    steps: tuple = ()
    substitution: dict = {}
    inferences: int = 0

    @property
    def found(self) -> bool:
        return self.outcome == TableauOutcome.proof


class _Search:

    def __init__(self, clauses: Sequence[Clause], deadline):
        self.clauses = list(clauses)
        self.deadline = deadline
        self.inferences = 0
        self.copies = 0
        self.index: dict[tuple[bool, str], list[tuple[int, int]]] = {}
        for clause_index, clause in enumerate(self.clauses):
            for lit_index, lit in enumerate(clause.literals):
                self.index.setdefault((lit.positive, lit.atom.symbol), []).append((clause_index, lit_index))

    def tick(self):
        self.inferences += 1
        if self.deadline is not None and self.inferences % _DEADLINE_CHECK_INTERVAL == 0:
            self.deadline.check()

    def fresh_copy(self, clause_index: int) -> tuple[tuple[Literal, ...], ExtensionStep]:
        clause = self.clauses[clause_index]
        self.copies += 1
        renaming = {v: FOVar(f"{v.name}#{self.copies}", v.ty) for v in clause.variables()}
        literals = tuple(Literal(lit.positive, apply_substitution(renaming, lit.atom)) for lit in clause.literals)
        return literals, ExtensionStep(clause_index, renaming)

    def prove_clause(self, literals, path, limit, sigma, trace) -> Iterator[tuple[Substitution, tuple]]:
        if not literals:
            yield sigma, trace
            return
        first, rest = literals[0], literals[1:]
        for sigma1, trace1 in self.prove_literal(first, path, limit, sigma, trace):
            yield from self.prove_clause(rest, path, limit, sigma1, trace1)

    def prove_literal(self, lit: Literal, path, limit, sigma, trace) -> Iterator[tuple[Substitution, tuple]]:
        self.tick()
        atom = apply_substitution(sigma, lit.atom)

        # regularity
        for p in path:
            if p.positive == lit.positive and apply_substitution(sigma, p.atom) == atom:
                return

        for p in reversed(path):
            if p.positive == lit.positive or p.atom.symbol != atom.symbol:
                continue
            try:
                sigma1 = unify(lit.atom, p.atom, sigma)
            except UnificationError:
                continue
            yield sigma1, trace

        if len(path) >= limit:
            return
        for clause_index, lit_index in self.index.get((not lit.positive, atom.symbol), ()):
            literals, step = self.fresh_copy(clause_index)
            try:
                sigma1 = unify(lit.atom, literals[lit_index].atom, sigma)
            except UnificationError:
                continue
            rest = literals[:lit_index] + literals[lit_index + 1:]
            yield from self.prove_clause(rest, path + (lit,), limit, sigma1, trace + (step,))


def tableau_prove(clauses: Sequence[Clause], max_depth: int = DEFAULT_MAX_DEPTH, deadline=None) -> TableauResult:
    """
    Search for a closed connection tableau.

    Args:
        clauses: input clauses
        max_depth: largest path length tried
        deadline: optional Deadline checked periodically

    Returns:
        a proof with the extension steps used and the final substitution,
        EXHAUSTED when no tableau closes within max_depth, TIMEOUT when the
        deadline passes
    """

    if max_depth < 1:
        raise ValueError(f"max_depth must be at least 1, got {max_depth}")

    for clause_index, clause in enumerate(clauses):
        if not clause.literals:
            return TableauResult(
                outcome=TableauOutcome.proof, depth=1, steps=(ExtensionStep(clause_index, {}),)
            )

    search = _Search(clauses, deadline)
    starts = [i for i, clause in enumerate(clauses) if clause.is_positive()]
    try:
        for limit in range(1, max_depth + 1):
            for clause_index in starts:
                literals, step = search.fresh_copy(clause_index)
                for sigma, trace in search.prove_clause(literals, (), limit, {}, (step,)):
                    logger.debug(f"Tableau closed at depth {limit} after {search.inferences} inferences")
                    return TableauResult(
                        outcome=TableauOutcome.proof,
                        depth=limit,
                        steps=trace,
                        substitution=sigma,
                        inferences=search.inferences,
                    )
    except DeadlineExceeded:
        return TableauResult(outcome=TableauOutcome.timeout, inferences=search.inferences)
    return TableauResult(outcome=TableauOutcome.exhausted, depth=max_depth, inferences=search.inferences)
