"""
The proof search graph.

Goals are nodes, at most one per goal fingerprint, and successful tactic
applications are hyperedges from a goal to its list of subgoals. A node is
CLOSED once one of its edges has all subgoals CLOSED, and FAILED once it has
been expanded and every edge has a FAILED subgoal. Nodes no longer reachable
from the root through live edges are IGNORED.

CLOSED and FAILED are final. IGNORED is the one status that moves back: a
later live edge that references an IGNORED node returns it to OPEN.
"""
import logging

from enum import Enum
from typing import NamedTuple, Sequence

from tacticforge.tactics.goal import Goal


logger = logging.getLogger(__name__)


class NodeStatus(str, Enum):
    open = "OPEN"
    closed = "CLOSED"
    failed = "FAILED"
    ignored = "IGNORED"


class EdgeStatus(str, Enum):
    pending = "PENDING"
    closed = "CLOSED"
    failed = "FAILED"
    superfluous = "SUPERFLUOUS"


TERMINAL = (NodeStatus.closed, NodeStatus.failed)


class StatusChange(NamedTuple):
    element: str
    index: int
    old: str
    new: str


class SearchNode:

    def __init__(self, index: int, goal: Goal, generation: int):
        self.index = index
        self.goal = goal
        self.fp = goal.fingerprint
        self.generation = generation
        self.status = NodeStatus.open
        self.expanded = False
        self.incoming: list["TacticEdge"] = []
        self.outgoing: list["TacticEdge"] = []
        self.closing_edge: "TacticEdge | None" = None
        self.failed_attempts = 0

    def __repr__(self):
        return f"SearchNode({self.index}, {self.status.value})"


class TacticEdge:

    def __init__(self, index: int, parent: SearchNode, tactic: str, args: Sequence[int], elapsed_ms: int):
        self.index = index
        self.parent = parent
        self.tactic = str(tactic)
        self.args = tuple(args)
        self.subgoals: list[SearchNode] = []
        self.status = EdgeStatus.pending
        self.elapsed_ms = elapsed_ms

    def has_failed_subgoal(self) -> bool:
        return any(s.status == NodeStatus.failed for s in self.subgoals)

    def all_closed(self) -> bool:
        return all(s.status == NodeStatus.closed for s in self.subgoals)

    def __repr__(self):
        return f"TacticEdge({self.index}, {self.tactic}, {self.status.value})"


class ProofSearchGraph:

    def __init__(self, root_goal: Goal):
        self.nodes: list[SearchNode] = []
        self.edges: list[TacticEdge] = []
        self._by_fp: dict[int, SearchNode] = {}
        self.changes: list[StatusChange] = []
        self.root = self._new_node(root_goal, 0)

    @property
    def proved(self) -> bool:
        return self.root.status == NodeStatus.closed

    @property
    def failed(self) -> bool:
        return self.root.status == NodeStatus.failed

    def node_for(self, goal: Goal) -> SearchNode | None:
        return self._by_fp.get(goal.fingerprint)

    def _new_node(self, goal: Goal, generation: int) -> SearchNode:
        node = SearchNode(len(self.nodes), goal, generation)
        self.nodes.append(node)
        self._by_fp[node.fp] = node
        return node

    def _set_node(self, node: SearchNode, status: NodeStatus, changes: list[StatusChange]) -> None:
        change = StatusChange("node", node.index, node.status.value, status.value)
        node.status = status
        changes.append(change)
        self.changes.append(change)

    def _set_edge(self, edge: TacticEdge, status: EdgeStatus, changes: list[StatusChange]) -> None:
        change = StatusChange("edge", edge.index, edge.status.value, status.value)
        edge.status = status
        changes.append(change)
        self.changes.append(change)

    def status_counts(self) -> dict[str, int]:
        counts = {status.value: 0 for status in NodeStatus}
        for node in self.nodes:
            counts[node.status.value] += 1
        return counts

    # construction

    def insert_subgoal(self, parent_edge: TacticEdge, goal: Goal) -> SearchNode:
        """
        Attach `goal` as the next subgoal of `parent_edge`, sharing the node
        of an earlier identical goal. A FAILED shared node fails the edge at
        once.
        """

        node = self._by_fp.get(goal.fingerprint)
        if node is None:
            node = self._new_node(goal, parent_edge.parent.generation + 1)
        node.incoming.append(parent_edge)
        parent_edge.subgoals.append(node)
        if node.status == NodeStatus.failed and parent_edge.status == EdgeStatus.pending:
            self._set_edge(parent_edge, EdgeStatus.failed, [])
        return node

    def add_edge(
            self,
            parent: SearchNode,
            tactic: str,
            args: Sequence[int],
            subgoals: Sequence[Goal],
            elapsed_ms: int = 0,
    ) -> TacticEdge:
        """Record a successful tactic application and propagate what it settles."""

        edge = TacticEdge(len(self.edges), parent, tactic, args, elapsed_ms)
        self.edges.append(edge)
        parent.outgoing.append(edge)
        for goal in subgoals:
            self.insert_subgoal(edge, goal)

        changes: list[StatusChange] = []
        if parent.status == NodeStatus.closed:
            self._set_edge(edge, EdgeStatus.superfluous, changes)
        elif edge.status == EdgeStatus.pending and edge.all_closed():
            self._close_edge(edge, changes)
        elif edge.status == EdgeStatus.failed:
            self._maybe_fail(parent, changes)
        self._refresh_liveness(changes)
        return edge

    def mark_expanded(self, node: SearchNode) -> list[StatusChange]:
        """The node will get no further edges; fail it if none of them can close."""

        node.expanded = True
        changes: list[StatusChange] = []
        self._maybe_fail(node, changes)
        self._refresh_liveness(changes)
        return changes

    # propagation

    def propagate_closed(self, node: SearchNode) -> list[StatusChange]:
        """Close `node` and everything its closing makes closed or superfluous."""

        changes: list[StatusChange] = []
        self._close(node, changes)
        self._refresh_liveness(changes)
        return changes

    def propagate_failed(self, node: SearchNode) -> list[StatusChange]:
        """Fail `node`, its incoming edges and, recursively, parents left without live edges."""

        changes: list[StatusChange] = []
        self._fail(node, changes)
        self._refresh_liveness(changes)
        return changes

    def _close_edge(self, edge: TacticEdge, changes: list[StatusChange]) -> None:
        self._set_edge(edge, EdgeStatus.closed, changes)
        if edge.parent.status != NodeStatus.closed:
            edge.parent.closing_edge = edge
            self._close(edge.parent, changes)

    def _close(self, node: SearchNode, changes: list[StatusChange]) -> None:
        if node.status in TERMINAL:
            return
        self._set_node(node, NodeStatus.closed, changes)
        for edge in node.outgoing:
            if edge.status == EdgeStatus.pending:
                self._set_edge(edge, EdgeStatus.superfluous, changes)
        for edge in list(node.incoming):
            if edge.status == EdgeStatus.pending and edge.all_closed():
                self._close_edge(edge, changes)

    def _fail(self, node: SearchNode, changes: list[StatusChange]) -> None:
        if node.status in TERMINAL:
            return
        self._set_node(node, NodeStatus.failed, changes)
        for edge in list(node.incoming):
            if edge.status == EdgeStatus.pending:
                self._set_edge(edge, EdgeStatus.failed, changes)
            self._maybe_fail(edge.parent, changes)

    def _maybe_fail(self, node: SearchNode, changes: list[StatusChange]) -> None:
        if node.status in TERMINAL or not node.expanded:
            return
        if all(edge.has_failed_subgoal() for edge in node.outgoing):
            self._fail(node, changes)

    def _refresh_liveness(self, changes: list[StatusChange]) -> None:
        live = {self.root.index}
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.status in TERMINAL:
                continue
            for edge in node.outgoing:
                if edge.status != EdgeStatus.pending:
                    continue
                for sub in edge.subgoals:
                    if sub.index not in live:
                        live.add(sub.index)
                        stack.append(sub)

        for node in self.nodes:
            if node.status == NodeStatus.open and node.index not in live:
                self._set_node(node, NodeStatus.ignored, changes)
            elif node.status == NodeStatus.ignored and node.index in live:
                self._set_node(node, NodeStatus.open, changes)

    # queries

    def frontier(self) -> list[SearchNode]:
        """OPEN unexpanded nodes, shallowest generation first, then creation order."""

        pending = [n for n in self.nodes if n.status == NodeStatus.open and not n.expanded]
        return sorted(pending, key=lambda n: (n.generation, n.index))

    def proof_edges(self) -> list[TacticEdge]:
        """
        The proof tree of a closed root in preorder: for each node, its
        closing edge, then the proofs of that edge's subgoals in order.
        """

        if not self.proved:
            return []
        ordered = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            edge = node.closing_edge
            ordered.append(edge)
            stack.extend(reversed(edge.subgoals))
        return ordered
