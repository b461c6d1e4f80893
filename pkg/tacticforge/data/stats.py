"""
Corpus statistics.
"""
import logging

from typing import Iterable

import numpy as np

from pydantic import BaseModel

from tacticforge.data.splits import Split, split_of
from tacticforge.kernel.theorem import Provenance
from tacticforge.search.proof_log import ProofLog
from tacticforge.service.protocol import GoalPayload
from tacticforge.service.registry import TheoremRegistry
from tacticforge.sexpr.sexpr import tokenize_canonical


logger = logging.getLogger(__name__)


class CorpusStats(BaseModel):
    definitions: int = 0
    theorems: int = 0
    proof_states: int = 0
    token_mean: float = 0.0
    token_median: float = 0.0
    distinct_tokens: int = 0
    theorems_by_split: dict[str, int] = {}


def goal_tokens(goal: GoalPayload) -> list[str]:
    tokens = tokenize_canonical(goal.conclusion)
    for hyp in goal.hyps:
        tokens.extend(tokenize_canonical(hyp))
    return tokens


def corpus_stats(registry: TheoremRegistry | None, logs: Iterable[ProofLog]) -> CorpusStats:
    """
    Definitions and theorems of the registry, and the proof states of the
    logs (one per tactic application) with their token lengths.
    """

    definitions = 0
    theorems = 0
    by_split = {split.value: 0 for split in Split}
    for entry in registry or ():
        if entry.theorem.provenance == Provenance.definition:
            definitions += 1
            continue
        theorems += 1
        by_split[split_of(entry.fingerprint).value] += 1

    lengths = []
    vocabulary = set()
    for log in logs:
        for step in log.steps:
            tokens = goal_tokens(step.goal)
            lengths.append(len(tokens))
            vocabulary.update(tokens)

    stats = CorpusStats(
        definitions=definitions,
        theorems=theorems,
        proof_states=len(lengths),
        token_mean=float(np.mean(lengths)) if lengths else 0.0,
        token_median=float(np.median(lengths)) if lengths else 0.0,
        distinct_tokens=len(vocabulary),
        theorems_by_split=by_split,
    )
    logger.info(f"Corpus: {stats.theorems} theorems, {stats.proof_states} proof states")
    return stats
