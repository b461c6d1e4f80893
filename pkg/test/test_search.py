import numpy as np
import pytest

from tacticforge.kernel.syntax import mk_conj, mk_imp
from tacticforge.kernel.terms import Var
from tacticforge.kernel.types import BOOL
from tacticforge.policy.action_generator import Action, ActionGenerator
from tacticforge.policy.baseline import MesonPolicy
from tacticforge.search.bfs import bfs_prove
from tacticforge.search.graph import EdgeStatus, NodeStatus, ProofSearchGraph, StatusChange
from tacticforge.search.options import (
    MAX_SUCCESSFUL_APPS_RANGE,
    MAX_TOP_TACTICS_RANGE,
    NUM_TACTIC_ARGS_RANGE,
    ProverOptions,
    sample_options,
)
from tacticforge.search.proof_log import ProofLog, SearchOutcome, proof_log_path, read_proof_logs
from tacticforge.service.client import LocalProofAssistant
from tacticforge.service.registry import TheoremRegistry
from tacticforge.tactics.goal import Goal


p = Var("p", BOOL)
q = Var("q", BOOL)
POOL = [Goal([], Var(f"g{i}", BOOL)) for i in range(8)]


class ScriptedPolicy(ActionGenerator):
    """The same tactics for every goal"""

    name = "scripted"

    def __init__(self, *tactics):
        self.tactics = tactics

    def action_list(self, goal, candidates, num_tactic_args):
        return [Action(t) for t in self.tactics]


def _expected_statuses(graph):
    closed, failed = set(), set()
    changed = True
    while changed:
        changed = False
        for node in graph.nodes:
            if node.index not in closed and any(
                    all(s.index in closed for s in edge.subgoals) for edge in node.outgoing
            ):
                closed.add(node.index)
                changed = True
            if node.index not in failed and node.expanded and all(
                    any(s.index in failed for s in edge.subgoals) for edge in node.outgoing
            ):
                failed.add(node.index)
                changed = True
    assert not closed & failed

    live = {graph.root.index}
    stack = [graph.root]
    while stack:
        node = stack.pop()
        if node.index in closed or node.index in failed:
            continue
        for edge in node.outgoing:
            if any(s.index in failed for s in edge.subgoals):
                continue
            for sub in edge.subgoals:
                if sub.index not in live:
                    live.add(sub.index)
                    stack.append(sub)

    expected = {}
    for node in graph.nodes:
        if node.index in closed:
            expected[node.index] = NodeStatus.closed
        elif node.index in failed:
            expected[node.index] = NodeStatus.failed
        elif node.index in live:
            expected[node.index] = NodeStatus.open
        else:
            expected[node.index] = NodeStatus.ignored
    return expected


def test_graph_statuses_match_brute_force(scaled):
    """Incremental propagation agrees with a from-scratch fixpoint on random graphs"""
    rng = np.random.default_rng(1)
    for _ in range(scaled(200, 2_000)):
        graph = ProofSearchGraph(POOL[0])
        for _ in range(12):
            frontier = graph.frontier()
            if not frontier:
                break
            node = frontier[int(rng.integers(0, len(frontier)))]
            for _ in range(int(rng.integers(0, 3))):
                n_subgoals = int(rng.choice([0, 1, 1, 2, 2, 2]))
                subgoals = [POOL[int(rng.integers(0, len(POOL)))] for _ in range(n_subgoals)]
                graph.add_edge(node, "T", (), subgoals)
            graph.mark_expanded(node)

            expected = _expected_statuses(graph)
            assert {n.index: n.status for n in graph.nodes} == expected


def test_identical_subgoals_share_a_node():
    graph = ProofSearchGraph(Goal([], mk_conj(p, p)))
    edge = graph.add_edge(graph.root, "CONJ_TAC", (), [Goal([], p), Goal([], p)])
    assert len(graph.nodes) == 2
    assert edge.subgoals[0] is edge.subgoals[1]


def test_closing_makes_sibling_edges_superfluous():
    graph = ProofSearchGraph(POOL[0])
    graph.add_edge(graph.root, "A", (), [POOL[1]])
    graph.add_edge(graph.root, "B", (), [])
    assert graph.proved
    assert graph.nodes[1].status == NodeStatus.ignored
    assert [e.tactic for e in graph.proof_edges()] == ["B"]


def test_failed_subgoal_fails_parent_once_expanded():
    graph = ProofSearchGraph(POOL[0])
    graph.add_edge(graph.root, "A", (), [POOL[1]])
    child = graph.nodes[1]
    graph.mark_expanded(child)
    assert child.status == NodeStatus.failed
    assert graph.root.status == NodeStatus.open
    graph.mark_expanded(graph.root)
    assert graph.failed


def test_propagate_closed_reports_changes():
    graph = ProofSearchGraph(POOL[0])
    graph.add_edge(graph.root, "A", (), [POOL[1], POOL[2]])
    graph.add_edge(graph.root, "B", (), [POOL[3]])
    graph.propagate_closed(graph.node_for(POOL[1]))
    assert graph.root.status == NodeStatus.open

    changes = graph.propagate_closed(graph.node_for(POOL[2]))
    assert StatusChange("node", 0, "OPEN", "CLOSED") in changes
    assert StatusChange("edge", 1, "PENDING", "SUPERFLUOUS") in changes
    assert StatusChange("node", 3, "OPEN", "IGNORED") in changes
    assert graph.root.closing_edge.tactic == "A"
    assert graph.propagate_closed(graph.root) == []


def test_propagate_failed_reports_changes():
    graph = ProofSearchGraph(POOL[0])
    graph.add_edge(graph.root, "A", (), [POOL[1], POOL[2]])
    changes = graph.propagate_failed(graph.node_for(POOL[1]))
    assert changes == [
        StatusChange("node", 1, "OPEN", "FAILED"),
        StatusChange("edge", 0, "PENDING", "FAILED"),
        StatusChange("node", 2, "OPEN", "IGNORED"),
    ]
    assert graph.node_for(POOL[5]) is None
    assert graph.status_counts() == {"OPEN": 1, "CLOSED": 0, "FAILED": 1, "IGNORED": 1}
    graph.mark_expanded(graph.root)
    assert graph.failed


def test_insert_subgoal_shares_nodes_and_fails_edges():
    graph = ProofSearchGraph(POOL[0])
    first = graph.add_edge(graph.root, "A", (), [POOL[1]])
    graph.mark_expanded(graph.node_for(POOL[1]))
    assert first.status == EdgeStatus.failed

    edge = graph.add_edge(graph.root, "B", (), [POOL[2]])
    assert edge.status == EdgeStatus.pending
    node = graph.insert_subgoal(edge, POOL[1])
    assert node is graph.nodes[1]
    assert [s.index for s in edge.subgoals] == [2, 1]
    assert edge.status == EdgeStatus.failed
    assert len(graph.nodes) == 3


def test_ignored_node_reopens_when_referenced_again():
    graph = ProofSearchGraph(POOL[0])
    graph.add_edge(graph.root, "A", (), [POOL[1], POOL[2]])
    graph.mark_expanded(graph.nodes[1])
    assert graph.nodes[2].status == NodeStatus.ignored
    graph.add_edge(graph.root, "B", (), [POOL[2]])
    assert graph.nodes[2].status == NodeStatus.open
    assert graph.changes[-1] == StatusChange("node", 2, "IGNORED", "OPEN")

    graph.add_edge(graph.root, "C", (), [POOL[1]])
    assert graph.nodes[1].status == NodeStatus.failed

    moves = {(c.old, c.new) for c in graph.changes if c.element == "node"}
    assert moves <= {("OPEN", "CLOSED"), ("OPEN", "FAILED"), ("OPEN", "IGNORED"), ("IGNORED", "OPEN")}


def test_frontier_is_breadth_first():
    graph = ProofSearchGraph(POOL[0])
    graph.add_edge(graph.root, "A", (), [POOL[1], POOL[2]])
    graph.mark_expanded(graph.root)
    graph.add_edge(graph.nodes[1], "A", (), [POOL[3]])
    graph.mark_expanded(graph.nodes[1])
    assert [n.index for n in graph.frontier()] == [2, 3]


def test_proof_edges_are_preorder():
    graph = ProofSearchGraph(POOL[0])
    graph.add_edge(graph.root, "SPLIT", (), [POOL[1], POOL[2]])
    graph.add_edge(graph.nodes[1], "LEFT", (), [POOL[3]])
    graph.add_edge(graph.nodes[3], "LEAF", (), [])
    graph.add_edge(graph.nodes[2], "RIGHT", (), [])
    assert [e.tactic for e in graph.proof_edges()] == ["SPLIT", "LEFT", "LEAF", "RIGHT"]


@pytest.fixture
def assistant():
    return LocalProofAssistant(TheoremRegistry())


def test_bfs_proves_with_scripted_policy(assistant):
    goal = Goal([], mk_conj(mk_imp(p, p), mk_imp(q, q)))
    result = bfs_prove(goal, ProverOptions(), ScriptedPolicy("CONJ_TAC", "DISCH_TAC", "ACCEPT_TAC", "ITAUT_TAC"),
                       assistant, theorem="BOTH_REFL")
    assert result.proved
    log = result.log
    assert log.summary.outcome == SearchOutcome.proved
    assert log.summary.theorem == "BOTH_REFL"
    assert log.root_goal(assistant.env) == goal
    assert log.summary.nodes == len(result.graph.nodes)


def test_bfs_reports_failure(assistant):
    result = bfs_prove(Goal([], p), ProverOptions(), ScriptedPolicy("CONJ_TAC", "REFL_TAC"), assistant)
    assert result.outcome == SearchOutcome.failed
    assert result.log is None


def test_bfs_stops_at_node_budget(assistant):
    goal = Goal([], mk_conj(p, q))
    result = bfs_prove(goal, ProverOptions(node_budget=1), ScriptedPolicy("CONJ_TAC"), assistant)
    assert result.outcome == SearchOutcome.budget_exhausted


def test_bfs_with_meson_baseline(assistant, tmp_path):
    goal = Goal([mk_imp(p, q), p], q)
    result = bfs_prove(goal, ProverOptions(), MesonPolicy(), assistant, theorem="MP_GOAL")
    assert result.proved
    assert [step.tactic for step in result.log.steps] == ["ASM_MESON_TAC"]

    path = result.log.write(proof_log_path(tmp_path / "nested", "MP_GOAL"))
    assert ProofLog.read(path) == result.log
    assert read_proof_logs(tmp_path) == []
    assert read_proof_logs(tmp_path, recursive=True) == [result.log]


def test_sample_options_is_seeded():
    first = sample_options(7)
    assert first == sample_options(7)
    assert MAX_TOP_TACTICS_RANGE[0] <= first.max_top_tactics <= MAX_TOP_TACTICS_RANGE[1]
    assert MAX_SUCCESSFUL_APPS_RANGE[0] <= first.max_successful_apps <= MAX_SUCCESSFUL_APPS_RANGE[1]
    assert NUM_TACTIC_ARGS_RANGE[0] <= first.num_tactic_args <= NUM_TACTIC_ARGS_RANGE[1]
    assert {sample_options(seed).max_top_tactics for seed in range(50)} != {first.max_top_tactics}


def test_options_from_settings(settings):
    options = ProverOptions.from_settings(settings, node_budget=7)
    assert options.node_budget == 7
    assert options.tactic_timeout_s == settings.tactic_timeout_s


# chi-square critical values at the 0.1% level, keyed by degrees of freedom
CHI2_CRITICAL = {3: 16.266, 10: 29.588, 31: 61.098}


def test_sampled_options_are_uniform(scaled):
    samples = [sample_options(seed) for seed in range(scaled(2_000, 10_000))]
    for field, (low, high) in [
        ("max_top_tactics", MAX_TOP_TACTICS_RANGE),
        ("max_successful_apps", MAX_SUCCESSFUL_APPS_RANGE),
        ("num_tactic_args", NUM_TACTIC_ARGS_RANGE),
    ]:
        values = np.array([getattr(s, field) for s in samples])
        assert values.min() == low and values.max() == high, field
        counts = np.bincount(values - low, minlength=high - low + 1)
        expected = len(values) / counts.size
        statistic = float(((counts - expected) ** 2 / expected).sum())
        assert statistic < CHI2_CRITICAL[counts.size - 1], field
