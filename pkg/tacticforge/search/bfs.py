"""
Breadth-first proof search.
"""
import logging
import time

from typing import Sequence

from pydantic import BaseModel, ConfigDict

from tacticforge.policy.action_generator import ActionGenerator
from tacticforge.search.graph import NodeStatus, ProofSearchGraph, SearchNode
from tacticforge.search.options import ProverOptions
from tacticforge.search.proof_log import (
    ProofLog,
    ProofSource,
    ProofStepRecord,
    ProofSummaryRecord,
    SearchOutcome,
)
from tacticforge.service.client import ProofAssistant
from tacticforge.service.protocol import GoalPayload
from tacticforge.tactics.goal import Deadline, Goal


logger = logging.getLogger(__name__)


class ProofResult(BaseModel):

    model_config = ConfigDict(arbitrary_types_allowed=True)

    outcome: SearchOutcome
    log: ProofLog | None = None
    graph: ProofSearchGraph
    elapsed_ms: int = 0

    @property
    def proved(self) -> bool:
        return self.outcome == SearchOutcome.proved


def _expand(
        graph: ProofSearchGraph,
        node: SearchNode,
        policy: ActionGenerator,
        assistant: ProofAssistant,
        options: ProverOptions,
        candidates: Sequence[int],
        deadline: Deadline,
) -> bool:
    """
    Try the node's ranked actions until the attempt or success cap is hit.

    Returns:
        False when the total budget ran out before the node was fully expanded
    """

    actions = policy.action_list(node.goal, candidates, options.num_tactic_args)
    attempts = 0
    successes = 0
    for action in actions:
        if attempts >= options.max_top_tactics or successes >= options.max_successful_apps:
            break
        if node.status != NodeStatus.open:
            break
        remaining = deadline.remaining()
        if remaining is not None and remaining <= 0:
            return False

        budget = options.tactic_timeout_s if remaining is None else min(options.tactic_timeout_s, remaining)
        outcome = assistant.apply_tactic(node.goal, action.tactic, action.args, budget)
        attempts += 1
        if outcome.succeeded:
            successes += 1
            graph.add_edge(node, action.tactic, action.args, outcome.subgoals, outcome.elapsed_ms)
        else:
            node.failed_attempts += 1
            logger.debug(f"{action.tactic} failed on node {node.index}: {outcome.error_text}")

    graph.mark_expanded(node)
    return True


def proof_log_of(
        graph: ProofSearchGraph,
        outcome: SearchOutcome,
        elapsed_ms: int,
        theorem: str | None = None,
        source: ProofSource = ProofSource.loop,
        round: int | None = None,
) -> ProofLog:
    steps = [
        ProofStepRecord(
            index=i,
            goal=GoalPayload.from_goal(edge.parent.goal),
            tactic=edge.tactic,
            args=[str(fp) for fp in edge.args],
            subgoals=[GoalPayload.from_goal(s.goal) for s in edge.subgoals],
        )
        for i, edge in enumerate(graph.proof_edges())
    ]
    counts = graph.status_counts()
    summary = ProofSummaryRecord(
        theorem=theorem,
        fingerprint=str(graph.root.fp),
        source=source,
        round=round,
        outcome=outcome,
        nodes=len(graph.nodes),
        edges=len(graph.edges),
        closed=counts[NodeStatus.closed.value],
        failed=counts[NodeStatus.failed.value],
        ignored=counts[NodeStatus.ignored.value],
        elapsed_ms=elapsed_ms,
    )
    return ProofLog(steps=steps, summary=summary)


def bfs_prove(
        root_goal: Goal,
        options: ProverOptions,
        policy: ActionGenerator,
        assistant: ProofAssistant,
        candidates: Sequence[int] = (),
        theorem: str | None = None,
        source: ProofSource = ProofSource.loop,
        round: int | None = None,
) -> ProofResult:
    """
    Expand open goals shallowest first until the root closes or fails, the
    graph grows past the node budget, or the total time runs out.

    Args:
        root_goal: goal to prove
        options: search limits
        policy: ranks tactic applications
        assistant: applies tactics
        candidates: fingerprints of the theorems usable as arguments
        theorem: name recorded in the proof log
        source: origin recorded in the proof log
        round: loop round recorded in the proof log

    Returns:
        the outcome with the search graph, and a proof log when proved
    """

    start = time.monotonic()
    deadline = Deadline(options.total_timeout_s)
    graph = ProofSearchGraph(root_goal)
    candidates = list(candidates)

    outcome = None
    while outcome is None:
        frontier = graph.frontier()
        if not frontier:
            outcome = SearchOutcome.failed
            break
        if not _expand(graph, frontier[0], policy, assistant, options, candidates, deadline):
            outcome = SearchOutcome.timeout
        elif graph.proved:
            outcome = SearchOutcome.proved
        elif graph.failed:
            outcome = SearchOutcome.failed
        elif deadline.expired():
            outcome = SearchOutcome.timeout
        elif len(graph.nodes) > options.node_budget:
            outcome = SearchOutcome.budget_exhausted

    elapsed_ms = int((time.monotonic() - start) * 1000)
    log = None
    if outcome == SearchOutcome.proved:
        log = proof_log_of(graph, outcome, elapsed_ms, theorem, source, round)
    logger.info(
        f"{theorem or graph.root.fp}: {outcome.value} with {len(graph.nodes)} nodes "
        f"and {len(graph.edges)} edges in {elapsed_ms} ms"
    )
    return ProofResult(outcome=outcome, log=log, graph=graph, elapsed_ms=elapsed_ms)
