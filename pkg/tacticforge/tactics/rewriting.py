"""
First-order term rewriting with kernel-checked results.

`rewrite_engine` returns the rewritten term together with a theorem
`|- t = t'` assembled from congruence rules, so every rewrite is replayable.
"""
import logging

from enum import Enum
from typing import Sequence

from tacticforge.errors import RewriteLimitExceeded, RuleMismatch
from tacticforge.kernel.derived import (
    ALPHA,
    BETA_CONV,
    CONJUNCTS,
    EQF_INTRO,
    EQT_INTRO,
    INSTANTIATE,
    SPEC_ALL,
)
from tacticforge.kernel.matching import term_match
from tacticforge.kernel.syntax import is_conj, is_neg
from tacticforge.kernel.terms import (
    Abs,
    Comb,
    TermExpr,
    dest_eq,
    frees,
    frees_of_terms,
    is_beta_redex,
    is_eq,
    variant,
    vsubst,
)
from tacticforge.kernel.theorem import ABS, MK_COMB, REFL, TRANS, Theorem


logger = logging.getLogger(__name__)


DEFAULT_STEP_CAP = 10_000


class RewriteMode(str, Enum):
    exhaustive = "exhaustive"
    once = "once"


class RewriteRule:

    __slots__ = ("theorem", "lhs", "rhs", "fixed")

    def __init__(self, theorem: Theorem):
        self.theorem = theorem
        self.lhs, self.rhs = dest_eq(theorem.conclusion)
        self.fixed = frees_of_terms(theorem.hyps)

    def apply(self, tm: TermExpr) -> Theorem | None:
        try:
            tyinst, theta = term_match(self.lhs, tm, self.fixed)
        except RuleMismatch:
            return None
        th = INSTANTIATE(tyinst, theta, self.theorem)
        lhs, _ = dest_eq(th.conclusion)
        if lhs != tm:
            th = TRANS(ALPHA(tm, lhs), th)
        return th

    def loops(self) -> bool:
        """True when the left-hand side matches the right-hand side or one of its subterms."""

        for sub in _subterms(self.rhs):
            try:
                term_match(self.lhs, sub, self.fixed)
                return True
            except RuleMismatch:
                continue
        return False


def _subterms(tm: TermExpr):
    yield tm
    if isinstance(tm, Comb):
        yield from _subterms(tm.fn)
        yield from _subterms(tm.arg)
    elif isinstance(tm, Abs):
        yield from _subterms(tm.body)


def mk_rewrites(th: Theorem) -> list[Theorem]:
    """
    Equations usable as rewrite rules from a theorem: universals are
    specialized, conjunctions split, `|- ~p` becomes `p = F` and any other
    non-equation `|- p` becomes `p = T`.
    """

    th = SPEC_ALL(th)
    if is_conj(th.conclusion):
        return [rule for part in CONJUNCTS(th) for rule in mk_rewrites(part)]
    if is_eq(th.conclusion):
        return [th]
    if is_neg(th.conclusion):
        return [EQF_INTRO(th)]
    return [EQT_INTRO(th)]


def build_rules(theorems: Sequence[Theorem], mode: RewriteMode) -> list[RewriteRule]:
    rules = []
    for th in theorems:
        for eq in mk_rewrites(th):
            rule = RewriteRule(eq)
            if mode == RewriteMode.exhaustive and rule.loops():
                logger.debug(f"Loop guard rejected rewrite {eq!r}")
                continue
            rules.append(rule)
    return rules


class _Rewriter:

    def __init__(self, rules: list[RewriteRule], beta: bool, step_cap: int, deadline):
        self.rules = rules
        self.beta = beta
        self.step_cap = step_cap
        self.deadline = deadline
        self.steps = 0
        self.hyp_frees = frozenset()
        for rule in rules:
            self.hyp_frees = self.hyp_frees | rule.fixed

    def _tick(self):
        self.steps += 1
        if self.steps > self.step_cap:
            raise RewriteLimitExceeded(f"rewriting exceeded {self.step_cap} steps")
        if self.deadline is not None:
            self.deadline.check()

    def rewrite_here(self, tm: TermExpr) -> Theorem | None:
        if self.beta and is_beta_redex(tm):
            return BETA_CONV(tm)
        for rule in self.rules:
            th = rule.apply(tm)
            if th is not None:
                return th
        return None

    def _rename_binder(self, tm: Abs) -> tuple[Theorem, Abs]:
        fresh = variant(frees(tm) | self.hyp_frees | {tm.bound}, tm.bound)
        renamed = Abs(fresh, vsubst({tm.bound: fresh}, tm.body))
        return ALPHA(tm, renamed), renamed

    def _under_binder(self, tm: Abs, inner) -> Theorem | None:
        prefix = None
        if tm.bound in self.hyp_frees:
            prefix, tm = self._rename_binder(tm)
        body_th = inner(tm.body)
        if body_th is None:
            return None
        th = ABS(tm.bound, body_th)
        return th if prefix is None else TRANS(prefix, th)

    def leftmost_outermost(self, tm: TermExpr) -> Theorem | None:
        """Rewrite the first redex in preorder; None when there is none."""

        th = self.rewrite_here(tm)
        if th is not None:
            return th
        if isinstance(tm, Comb):
            fn_th = self.leftmost_outermost(tm.fn)
            if fn_th is not None:
                return MK_COMB(fn_th, REFL(tm.arg))
            arg_th = self.leftmost_outermost(tm.arg)
            if arg_th is not None:
                return MK_COMB(REFL(tm.fn), arg_th)
            return None
        if isinstance(tm, Abs):
            return self._under_binder(tm, self.leftmost_outermost)
        return None

    def exhaustive(self, tm: TermExpr) -> Theorem:
        th = REFL(tm)
        while True:
            current = dest_eq(th.conclusion)[1]
            step = self.leftmost_outermost(current)
            if step is None:
                return th
            self._tick()
            th = TRANS(th, step)

    def once(self, tm: TermExpr) -> Theorem | None:
        """One top-down pass: rewritten subterms are not revisited."""

        th = self.rewrite_here(tm)
        if th is not None:
            self._tick()
            return th
        if isinstance(tm, Comb):
            fn_th = self.once(tm.fn)
            arg_th = self.once(tm.arg)
            if fn_th is None and arg_th is None:
                return None
            return MK_COMB(fn_th or REFL(tm.fn), arg_th or REFL(tm.arg))
        if isinstance(tm, Abs):
            return self._under_binder(tm, self.once)
        return None


def rewrite_engine(
        tm: TermExpr,
        theorems: Sequence[Theorem],
        mode: RewriteMode = RewriteMode.exhaustive,
        beta: bool = False,
        step_cap: int = DEFAULT_STEP_CAP,
        deadline=None,
) -> tuple[TermExpr, Theorem]:
    """
    Rewrite `tm` with the equations derived from `theorems`.

    Args:
        tm: term to rewrite
        theorems: rewrite theorems, possibly universally quantified or conjunctive
        mode: exhaustive (to a fixpoint, leftmost-outermost) or once (one top-down pass)
        beta: also contract beta redexes
        step_cap: maximum number of rewrite steps in exhaustive mode
        deadline: optional Deadline checked at every step

    Returns:
        the rewritten term and the theorem |- tm = rewritten
    """

    rules = build_rules(theorems, mode)
    rewriter = _Rewriter(rules, beta, step_cap, deadline)
    if mode == RewriteMode.exhaustive:
        th = rewriter.exhaustive(tm)
    else:
        th = rewriter.once(tm) or REFL(tm)
    result = dest_eq(th.conclusion)[1]
    logger.debug(f"Rewrote in {rewriter.steps} steps")
    return result, th
