"""
Greedy removal of tactic arguments that do not affect the outcome.
"""
import logging

from typing import Sequence

from pydantic import BaseModel

from tacticforge.search.proof_log import ProofLog
from tacticforge.service.client import ProofAssistant
from tacticforge.service.protocol import ApplyStatus
from tacticforge.tactics.goal import Goal


logger = logging.getLogger(__name__)


class PruneResult(BaseModel):
    kept: list[int]
    removed: list[int]
    reapplications: int = 0


def prune_arguments(
        goal: Goal,
        tactic: str,
        args: Sequence[int],
        assistant: ProofAssistant,
        subgoals: Sequence[Goal] | None = None,
        timeout_s: float | None = None,
) -> PruneResult:
    """
    Drop arguments one at a time, lowest ranked first, keeping a removal
    only when the tactic still succeeds with the same subgoals. An argument
    whose trial application times out is kept.

    Args:
        goal: goal the tactic was applied to
        tactic: tactic name
        args: argument fingerprints, best ranked first
        assistant: proof assistant used for the trial applications
        subgoals: subgoals of the original application, recomputed when not given
        timeout_s: budget of each trial application

    Returns:
        kept arguments in their original order, and the removed ones in removal order
    """

    kept = list(args)
    if not kept:
        return PruneResult(kept=[], removed=[])

    reapplications = 0
    if subgoals is None:
        original = assistant.apply_tactic(goal, tactic, kept, timeout_s)
        reapplications += 1
        if not original.succeeded:
            logger.warning(f"{tactic} no longer applies to {goal!r}; arguments left as they are")
            return PruneResult(kept=kept, removed=[], reapplications=reapplications)
        subgoals = original.subgoals
    target = tuple(subgoals)

    removed = []
    for arg in reversed(list(args)):
        trial = [a for a in kept if a != arg]
        outcome = assistant.apply_tactic(goal, tactic, trial, timeout_s)
        reapplications += 1
        if outcome.status == ApplyStatus.timeout:
            continue
        if outcome.succeeded and tuple(outcome.subgoals) == target:
            kept = trial
            removed.append(arg)

    if removed:
        logger.debug(f"{tactic}: pruned {len(removed)} of {len(args)} arguments")
    return PruneResult(kept=kept, removed=removed, reapplications=reapplications)


def prune_log(log: ProofLog, assistant: ProofAssistant, timeout_s: float | None = None) -> ProofLog:
    """
    Prune every step of a proof log. Removed arguments are recorded as the
    step's negative arguments; steps that take no arguments are left alone.
    """

    env = assistant.env
    steps = []
    for step in log.steps:
        if not step.args:
            steps.append(step)
            continue
        result = prune_arguments(
            step.goal.to_goal(env),
            step.tactic,
            [int(a) for a in step.args],
            assistant,
            [s.to_goal(env) for s in step.subgoals],
            timeout_s,
        )
        negatives = [str(a) for a in result.removed] + [a for a in step.negative_args if int(a) not in result.kept]
        steps.append(step.model_copy(update=dict(
            args=[str(a) for a in result.kept],
            negative_args=list(dict.fromkeys(negatives)),
        )))
    return log.model_copy(update=dict(steps=steps))
