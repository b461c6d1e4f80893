"""
Non-learned policies: MESON alone, and tactic frequencies with TF-IDF
premise selection.
"""
import logging

from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from tacticforge.data.examples import TrainingExample
from tacticforge.kernel.terms import TermExpr
from tacticforge.policy.action_generator import Action, ActionGenerator, ranked
from tacticforge.policy.encoder import term_tokens
from tacticforge.service.registry import TheoremRegistry
from tacticforge.settings import Settings, get_settings
from tacticforge.tactics.goal import Goal
from tacticforge.tactics.library import ArityClass, TacticId, arity_of, registered_tactics


logger = logging.getLogger(__name__)


class MesonPolicy(ActionGenerator):

    name = "baseline-meson"

    def action_list(self, goal, candidates, num_tactic_args):
        return [Action(TacticId.ASM_MESON_TAC.value)]


def _content_tokens(tm: TermExpr) -> list[str]:
    return [t for t in term_tokens(tm) if t not in ("(", ")")]


class TfidfIndex:
    """TF-IDF vectors of registered theorem conclusions."""

    def __init__(self, registry: TheoremRegistry):
        documents = {entry.fingerprint: Counter(_content_tokens(entry.theorem.conclusion)) for entry in registry}
        vocabulary = sorted({token for counts in documents.values() for token in counts})
        self.columns = {token: i for i, token in enumerate(vocabulary)}
        self.rows = {fp: i for i, fp in enumerate(documents)}

        n_docs = len(documents)
        df = np.zeros(len(vocabulary))
        matrix = np.zeros((n_docs, len(vocabulary)))
        for fp, counts in documents.items():
            for token, count in counts.items():
                matrix[self.rows[fp], self.columns[token]] = count
                df[self.columns[token]] += 1
        self.idf = np.log((1 + n_docs) / (1 + df)) + 1
        matrix *= self.idf
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        self.matrix = matrix / np.where(norms == 0, 1, norms)

    def vector(self, tm: TermExpr) -> np.ndarray:
        vec = np.zeros(len(self.columns))
        for token, count in Counter(_content_tokens(tm)).items():
            column = self.columns.get(token)
            if column is not None:
                vec[column] = count
        vec *= self.idf
        norm = np.linalg.norm(vec)
        return vec / norm if norm else vec

    def scores(self, tm: TermExpr, candidates: Sequence[int]) -> np.ndarray:
        """Cosine similarity of the term to each candidate; unknown candidates score 0."""

        vec = self.vector(tm)
        out = np.zeros(len(candidates))
        for i, fp in enumerate(candidates):
            row = self.rows.get(fp)
            if row is not None:
                out[i] = self.matrix[row] @ vec
        return out


class FrequencyTfidfPolicy(ActionGenerator):
    """
    Tactics by their frequency in human proofs, ties in enumeration order;
    arguments by TF-IDF cosine between goal and premise tokens.
    """

    name = "baseline-tfidf"

    def __init__(
            self,
            registry: TheoremRegistry,
            tactic_counts: dict[str, int] | None = None,
            settings: Settings | None = None,
    ):
        settings = settings or get_settings()
        self.tactics = [t.value for t in registered_tactics(settings)]
        self.tactic_counts = dict(tactic_counts or {})
        self.index = TfidfIndex(registry)

    @classmethod
    def from_examples(
            cls, registry: TheoremRegistry, examples: Iterable[TrainingExample], settings: Settings | None = None
    ) -> "FrequencyTfidfPolicy":
        counts = Counter(ex.tactic for ex in examples)
        return cls(registry, dict(counts), settings)

    def tactic_order(self) -> list[str]:
        scores = np.array([self.tactic_counts.get(t, 0) for t in self.tactics])
        return [self.tactics[i] for i in ranked(scores)]

    def action_list(self, goal: Goal, candidates, num_tactic_args):
        scores = self.index.scores(goal.conclusion, candidates) if candidates else None
        top = [] if scores is None else [candidates[i] for i in ranked(scores)[:num_tactic_args]]

        actions = []
        for tactic in self.tactic_order():
            if arity_of(tactic) == ArityClass.no_args:
                actions.append(Action(tactic))
            else:
                actions.append(Action(tactic, tuple(top)))
        return actions
