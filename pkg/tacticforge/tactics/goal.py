"""
Goals, tactic results and justifications.
"""
import logging
import time

from enum import Enum
from typing import Callable, Iterable, Sequence

from pydantic import BaseModel, ConfigDict

from tacticforge.errors import DeadlineExceeded, RuleMismatch
from tacticforge.kernel.derived import ALPHA
from tacticforge.kernel.terms import TermExpr, alpha_equal, bool_check
from tacticforge.kernel.theorem import EQ_MP, Theorem
from tacticforge.sexpr.codec import alpha_key, print_term
from tacticforge.sexpr.fingerprint import sequent_fingerprint


logger = logging.getLogger(__name__)


class Goal:
    """
    A proof obligation `hyps ?- conclusion`.

    Hypotheses keep their order (the first one is the most recently
    introduced) and are deduplicated up to alpha-equivalence. Two goals are
    equal when their hypothesis sets and conclusions are alpha-equal.
    """

    __slots__ = ("hyps", "conclusion", "_key", "_fingerprint")

    def __init__(self, hyps: Iterable[TermExpr], conclusion: TermExpr):
        seen = set()
        unique = []
        for hyp in hyps:
            bool_check(hyp, "hypothesis")
            key = alpha_key(hyp)
            if key not in seen:
                seen.add(key)
                unique.append(hyp)
        bool_check(conclusion, "goal")
        object.__setattr__(self, "hyps", tuple(unique))
        object.__setattr__(self, "conclusion", conclusion)
        object.__setattr__(self, "_key", (frozenset(seen), alpha_key(conclusion)))
        object.__setattr__(self, "_fingerprint", None)

    def __setattr__(self, key, value):
        raise AttributeError("Goal is immutable")

    def __eq__(self, other):
        return isinstance(other, Goal) and other._key == self._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        hyps = ", ".join(print_term(h) for h in self.hyps)
        return f"Goal([{hyps}] ?- {print_term(self.conclusion)})"

    @property
    def fingerprint(self) -> int:
        if self._fingerprint is None:
            object.__setattr__(self, "_fingerprint", sequent_fingerprint(self.hyps, self.conclusion))
        return self._fingerprint

    def has_hyp(self, tm: TermExpr) -> bool:
        return alpha_key(tm) in self._key[0]

    def hyp_keys(self) -> frozenset[str]:
        return self._key[0]

    def with_conclusion(self, conclusion: TermExpr) -> "Goal":
        return Goal(self.hyps, conclusion)

    def with_hyp(self, hyp: TermExpr, conclusion: TermExpr) -> "Goal":
        return Goal((hyp,) + self.hyps, conclusion)


def proves(th: Theorem, goal: Goal) -> bool:
    """True when th establishes the goal: same conclusion, hypotheses among the goal's."""

    return alpha_equal(th.conclusion, goal.conclusion) and th.hyp_keys() <= goal.hyp_keys()


def align(th: Theorem, goal: Goal) -> Theorem:
    """Restate an alpha-equal conclusion with exactly the goal's bound variable names."""

    if th.conclusion == goal.conclusion:
        return th
    return EQ_MP(ALPHA(th.conclusion, goal.conclusion), th)


class Deadline:
    """Wall-clock budget for one tactic call."""

    def __init__(self, seconds: float | None):
        self.seconds = seconds
        self.expires = None if seconds is None else time.monotonic() + seconds

    def remaining(self) -> float | None:
        if self.expires is None:
            return None
        return self.expires - time.monotonic()

    def expired(self) -> bool:
        return self.expires is not None and time.monotonic() > self.expires

    def check(self) -> None:
        if self.expired():
            raise DeadlineExceeded(f"budget of {self.seconds}s exceeded")


class Justification:
    """
    Turns one theorem per subgoal into a theorem for the goal, using kernel
    rules only.
    """

    def __init__(self, goal: Goal, n_subgoals: int, build: Callable[[Sequence[Theorem]], Theorem]):
        self.goal = goal
        self.n_subgoals = n_subgoals
        self._build = build

    def __call__(self, theorems: Sequence[Theorem]) -> Theorem:
        if len(theorems) != self.n_subgoals:
            raise RuleMismatch(
                f"justification expects {self.n_subgoals} theorems, got {len(theorems)}"
            )
        th = self._build(list(theorems))
        if not proves(th, self.goal):
            raise RuleMismatch(f"justification produced {th!r} which does not prove {self.goal!r}")
        return align(th, self.goal)


class TacticOutcome(str, Enum):
    success = "SUCCESS"
    failure = "FAILURE"
    timeout = "TIMEOUT"


class TacticResult(BaseModel):

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    outcome: TacticOutcome
    subgoals: tuple[Goal, ...] = ()
    justification: Justification | None = None
    reason: str = ""

    @classmethod
    def success(cls, subgoals: Sequence[Goal], justification: Justification) -> "TacticResult":
        return cls(outcome=TacticOutcome.success, subgoals=tuple(subgoals), justification=justification)

    @classmethod
    def failure(cls, reason: str) -> "TacticResult":
        return cls(outcome=TacticOutcome.failure, reason=reason)

    @classmethod
    def timeout(cls, reason: str = "timeout") -> "TacticResult":
        return cls(outcome=TacticOutcome.timeout, reason=reason)

    @property
    def succeeded(self) -> bool:
        return self.outcome == TacticOutcome.success

    @property
    def closes_goal(self) -> bool:
        return self.succeeded and not self.subgoals
