"""
Action generators: ranked lists of tactic applications for a goal.
"""
import logging

from abc import ABC, abstractmethod
from typing import NamedTuple, Sequence

import numpy as np

from tacticforge.policy.model import PolicyModel
from tacticforge.service.registry import TheoremRegistry
from tacticforge.tactics.goal import Goal
from tacticforge.tactics.library import ArityClass, arity_of


logger = logging.getLogger(__name__)


class Action(NamedTuple):
    tactic: str
    args: tuple[int, ...] = ()


def ranked(scores: np.ndarray) -> np.ndarray:
    """Indices by descending score, ties in index order."""

    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


class ActionGenerator(ABC):

    name = "abstract"

    @abstractmethod
    def action_list(self, goal: Goal, candidates: Sequence[int], num_tactic_args: int) -> list[Action]:
        """
        Tactic applications for `goal`, best first. Arguments are drawn from
        `candidates` and listed best first, at most `num_tactic_args` of them.
        """


class LearnedPolicy(ActionGenerator):
    """Rankings from a two-tower checkpoint over the theorems of a registry."""

    name = "learned"

    def __init__(self, model: PolicyModel, registry: TheoremRegistry):
        self.model = model
        self.registry = registry

    def premise_embeddings(self, candidates: Sequence[int]) -> np.ndarray:
        """
        Raises:
            UnknownFingerprint: a candidate is not registered
        """

        rows = [
            self.model.encode_premise(self.registry.get(fp).conclusion, fp) for fp in candidates
        ]
        return np.array(rows).reshape(len(rows), self.model.dim)

    def precompute(self, candidates: Sequence[int]) -> None:
        self.premise_embeddings(candidates)

    def rank_tactics(self, goal: Goal) -> np.ndarray:
        return self.model.rank_tactics(self.model.encode_goal(goal.conclusion))

    def rank_arguments(self, goal: Goal, tactic: str, candidates: Sequence[int]) -> tuple[np.ndarray, float]:
        g = self.model.encode_goal(goal.conclusion)
        return self.model.rank_arguments(g, tactic, self.premise_embeddings(candidates))

    def action_list(self, goal, candidates, num_tactic_args):
        g = self.model.encode_goal(goal.conclusion)
        logits = self.model.rank_tactics(g)
        premises = self.premise_embeddings(candidates) if candidates else None

        actions = []
        for index in ranked(logits):
            tactic = self.model.tactics[index]
            if arity_of(tactic) == ArityClass.no_args or premises is None or num_tactic_args == 0:
                actions.append(Action(tactic))
                continue
            scores, empty = self.model.rank_arguments(g, tactic, premises)
            if empty > scores.max():
                actions.append(Action(tactic))
                continue
            top = ranked(scores)[:num_tactic_args]
            actions.append(Action(tactic, tuple(candidates[i] for i in top)))
        return actions
