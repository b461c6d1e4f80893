"""
The tactic set.

Each tactic maps a goal and a list of theorem arguments to subgoals and a
justification. Tactics signal inapplicability by raising TacticFailure;
`apply_tactic` turns that and every other expected outcome into a
TacticResult.
"""
import logging

from enum import Enum
from typing import Sequence

from tacticforge.errors import (
    DeadlineExceeded,
    KernelError,
    RewriteLimitExceeded,
    RuleMismatch,
    TacticFailure,
)
from tacticforge.fol.meson import meson
from tacticforge.fol.refutation import ReconstructionFailure, refute
from tacticforge.kernel.clauses import basic_rewrites
from tacticforge.kernel.derived import (
    CCONTR,
    CONJ,
    CONTR,
    DISCH,
    DISJ1,
    DISJ2,
    GEN,
    IMP_ANTISYM_RULE,
    INSTANTIATE,
    MP,
    NOT_INTRO,
    SPEC,
    SYM,
    UNDISCH,
    truth,
)
from tacticforge.kernel.matching import term_match
from tacticforge.kernel.syntax import (
    FALSE,
    dest_conj,
    dest_disj,
    dest_forall,
    dest_imp,
    dest_neg,
    is_bool_eq,
    is_conj,
    is_disj,
    is_forall,
    is_imp,
    is_neg,
    is_true,
    mk_imp,
    mk_neg,
    strip_forall,
)
from tacticforge.kernel.terms import alpha_equal, dest_eq, frees_of_terms, is_eq, variant, vsubst
from tacticforge.kernel.theorem import ASSUME, EQ_MP, REFL, Theorem
from tacticforge.settings import Settings, get_settings
from tacticforge.tactics.goal import Deadline, Goal, Justification, TacticResult, proves
from tacticforge.tactics.rewriting import RewriteMode, rewrite_engine


logger = logging.getLogger(__name__)


INAPPLICABLE = "inapplicable"


class TacticId(str, Enum):
    ACCEPT_TAC = "ACCEPT_TAC"
    REFL_TAC = "REFL_TAC"
    CONJ_TAC = "CONJ_TAC"
    DISJ1_TAC = "DISJ1_TAC"
    DISJ2_TAC = "DISJ2_TAC"
    DISCH_TAC = "DISCH_TAC"
    UNDISCH_TAC0 = "UNDISCH_TAC0"
    GEN_TAC = "GEN_TAC"
    EQ_TAC = "EQ_TAC"
    MATCH_MP_TAC = "MATCH_MP_TAC"
    MP_TAC = "MP_TAC"
    REWRITE_TAC = "REWRITE_TAC"
    ASM_REWRITE_TAC = "ASM_REWRITE_TAC"
    PURE_ONCE_REWRITE_TAC = "PURE_ONCE_REWRITE_TAC"
    MESON_TAC = "MESON_TAC"
    ASM_MESON_TAC = "ASM_MESON_TAC"
    CONTR_TAC = "CONTR_TAC"
    ITAUT_TAC = "ITAUT_TAC"


class ArityClass(str, Enum):
    no_args = "NO_ARGS"
    thm_list = "THM_LIST"


class TacticContext:
    """Per-call limits handed to a tactic."""

    def __init__(self, deadline: Deadline, meson_max_depth: int, rewrite_step_cap: int):
        self.deadline = deadline
        self.meson_max_depth = meson_max_depth
        self.rewrite_step_cap = rewrite_step_cap


def _closed(goal: Goal, th: Theorem) -> TacticResult:
    return TacticResult.success([], Justification(goal, 0, lambda _: th))


class Tactic:
    """
    Base class of tactics.

    `exec` returns a successful TacticResult or raises TacticFailure.
    """

    tactic_id: TacticId
    arity: ArityClass = ArityClass.thm_list
    requires_args: bool = False

    def exec(self, goal: Goal, args: Sequence[Theorem], context: TacticContext) -> TacticResult:
        raise NotImplementedError

    def __str__(self):
        return self.tactic_id.value


class AcceptTac(Tactic):
    """Close the goal with the first argument that proves it."""

    tactic_id = TacticId.ACCEPT_TAC
    requires_args = True

    def exec(self, goal, args, context):
        for th in args:
            if proves(th, goal):
                return _closed(goal, th)
        raise TacticFailure("no argument proves the goal")


class ReflTac(Tactic):

    tactic_id = TacticId.REFL_TAC
    arity = ArityClass.no_args

    def exec(self, goal, args, context):
        if not is_eq(goal.conclusion):
            raise TacticFailure(INAPPLICABLE)
        lhs, rhs = dest_eq(goal.conclusion)
        if not alpha_equal(lhs, rhs):
            raise TacticFailure(INAPPLICABLE)
        return _closed(goal, REFL(lhs))


class ConjTac(Tactic):

    tactic_id = TacticId.CONJ_TAC
    arity = ArityClass.no_args

    def exec(self, goal, args, context):
        if not is_conj(goal.conclusion):
            raise TacticFailure(INAPPLICABLE)
        p, q = dest_conj(goal.conclusion)
        subgoals = [goal.with_conclusion(p), goal.with_conclusion(q)]
        return TacticResult.success(subgoals, Justification(goal, 2, lambda ths: CONJ(ths[0], ths[1])))


class Disj1Tac(Tactic):

    tactic_id = TacticId.DISJ1_TAC
    arity = ArityClass.no_args

    def exec(self, goal, args, context):
        if not is_disj(goal.conclusion):
            raise TacticFailure(INAPPLICABLE)
        p, q = dest_disj(goal.conclusion)
        return TacticResult.success(
            [goal.with_conclusion(p)], Justification(goal, 1, lambda ths: DISJ1(ths[0], q))
        )


class Disj2Tac(Tactic):

    tactic_id = TacticId.DISJ2_TAC
    arity = ArityClass.no_args

    def exec(self, goal, args, context):
        if not is_disj(goal.conclusion):
            raise TacticFailure(INAPPLICABLE)
        p, q = dest_disj(goal.conclusion)
        return TacticResult.success(
            [goal.with_conclusion(q)], Justification(goal, 1, lambda ths: DISJ2(p, ths[0]))
        )


class DischTac(Tactic):
    """Move the antecedent of an implication, or the body of a negation, into the hypotheses."""

    tactic_id = TacticId.DISCH_TAC
    arity = ArityClass.no_args

    def exec(self, goal, args, context):
        concl = goal.conclusion
        if is_imp(concl):
            p, q = dest_imp(concl)
            return TacticResult.success(
                [goal.with_hyp(p, q)], Justification(goal, 1, lambda ths: DISCH(p, ths[0]))
            )
        if is_neg(concl):
            p = dest_neg(concl)
            return TacticResult.success(
                [goal.with_hyp(p, FALSE)], Justification(goal, 1, lambda ths: NOT_INTRO(DISCH(p, ths[0])))
            )
        raise TacticFailure(INAPPLICABLE)


class UndischTac0(Tactic):

    tactic_id = TacticId.UNDISCH_TAC0
    arity = ArityClass.no_args

    def exec(self, goal, args, context):
        if not goal.hyps:
            raise TacticFailure(INAPPLICABLE)
        hyp, rest = goal.hyps[0], goal.hyps[1:]
        subgoal = Goal(rest, mk_imp(hyp, goal.conclusion))
        return TacticResult.success([subgoal], Justification(goal, 1, lambda ths: UNDISCH(ths[0])))


class GenTac(Tactic):

    tactic_id = TacticId.GEN_TAC
    arity = ArityClass.no_args

    def exec(self, goal, args, context):
        if not is_forall(goal.conclusion):
            raise TacticFailure(INAPPLICABLE)
        x, body = dest_forall(goal.conclusion)
        fresh = variant(frees_of_terms(goal.hyps + (goal.conclusion,)), x)
        subgoal = goal.with_conclusion(vsubst({x: fresh}, body))
        return TacticResult.success([subgoal], Justification(goal, 1, lambda ths: GEN(fresh, ths[0])))


class EqTac(Tactic):

    tactic_id = TacticId.EQ_TAC
    arity = ArityClass.no_args

    def exec(self, goal, args, context):
        if not is_bool_eq(goal.conclusion):
            raise TacticFailure(INAPPLICABLE)
        p, q = dest_eq(goal.conclusion)
        subgoals = [goal.with_conclusion(mk_imp(p, q)), goal.with_conclusion(mk_imp(q, p))]
        return TacticResult.success(
            subgoals, Justification(goal, 2, lambda ths: IMP_ANTISYM_RULE(ths[0], ths[1]))
        )


def specialize_avoiding(th: Theorem, goal: Goal) -> Theorem:
    """Strip outer universals with variables not free in the goal or the theorem."""

    vs, _ = strip_forall(th.conclusion)
    avoid = set(frees_of_terms(goal.hyps + (goal.conclusion, th.conclusion) + th.hyps))
    for v in vs:
        fresh = variant(avoid, v)
        avoid.add(fresh)
        th = SPEC(fresh, th)
    return th


def match_mp(goal: Goal, impl: Theorem) -> TacticResult:
    """
    Backward chaining through `|- !xs. p ==> q`: when q matches the goal,
    the instantiated p becomes the new goal. Variables of p that q does
    not determine stay free in the subgoal.
    """

    th = specialize_avoiding(impl, goal)
    if not is_imp(th.conclusion):
        raise TacticFailure("no match")
    _, q = dest_imp(th.conclusion)
    try:
        tyinst, theta = term_match(q, goal.conclusion, frees_of_terms(th.hyps))
        instance = INSTANTIATE(tyinst, theta, th)
    except RuleMismatch as e:
        raise TacticFailure("no match") from e
    if not instance.hyp_keys() <= goal.hyp_keys():
        raise TacticFailure("no match")
    antecedent, _ = dest_imp(instance.conclusion)
    return TacticResult.success(
        [goal.with_conclusion(antecedent)], Justification(goal, 1, lambda ths: MP(instance, ths[0]))
    )


class MatchMpTac(Tactic):

    tactic_id = TacticId.MATCH_MP_TAC
    requires_args = True

    def exec(self, goal, args, context):
        for impl in args:
            try:
                return match_mp(goal, impl)
            except TacticFailure:
                continue
        raise TacticFailure("no match")


class MpTac(Tactic):
    """Add the argument conclusions as antecedents of the goal, in list order."""

    tactic_id = TacticId.MP_TAC
    requires_args = True

    def exec(self, goal, args, context):
        concl = goal.conclusion
        for th in reversed(args):
            concl = mk_imp(th.conclusion, concl)

        def justify(ths):
            result = ths[0]
            for th in args:
                result = MP(result, th)
            return result

        return TacticResult.success([goal.with_conclusion(concl)], Justification(goal, 1, justify))


def _rewrite(goal: Goal, theorems: Sequence[Theorem], mode: RewriteMode, beta: bool,
             context: TacticContext) -> TacticResult:
    rewritten, eq = rewrite_engine(
        goal.conclusion,
        theorems,
        mode=mode,
        beta=beta,
        step_cap=context.rewrite_step_cap,
        deadline=context.deadline,
    )
    if alpha_equal(rewritten, goal.conclusion):
        raise TacticFailure("no change")
    back = SYM(eq)
    if is_true(rewritten):
        return _closed(goal, EQ_MP(back, truth()))
    return TacticResult.success(
        [goal.with_conclusion(rewritten)], Justification(goal, 1, lambda ths: EQ_MP(back, ths[0]))
    )


class RewriteTac(Tactic):

    tactic_id = TacticId.REWRITE_TAC

    def exec(self, goal, args, context):
        return _rewrite(goal, list(args) + list(basic_rewrites()), RewriteMode.exhaustive, True, context)


class AsmRewriteTac(Tactic):

    tactic_id = TacticId.ASM_REWRITE_TAC

    def exec(self, goal, args, context):
        theorems = list(args) + [ASSUME(h) for h in goal.hyps] + list(basic_rewrites())
        return _rewrite(goal, theorems, RewriteMode.exhaustive, True, context)


class PureOnceRewriteTac(Tactic):

    tactic_id = TacticId.PURE_ONCE_REWRITE_TAC
    requires_args = True

    def exec(self, goal, args, context):
        return _rewrite(goal, args, RewriteMode.once, False, context)


class MesonTac(Tactic):

    tactic_id = TacticId.MESON_TAC
    use_hyps = False

    def exec(self, goal, args, context):
        th = meson(goal, args, self.use_hyps, context.meson_max_depth, context.deadline)
        return _closed(goal, th)


class AsmMesonTac(MesonTac):

    tactic_id = TacticId.ASM_MESON_TAC
    use_hyps = True


class ContrTac(Tactic):
    """Close the goal when the hypotheses and arguments are propositionally contradictory."""

    tactic_id = TacticId.CONTR_TAC

    def exec(self, goal, args, context):
        theorems = [ASSUME(h) for h in goal.hyps] + list(args)
        try:
            falsity = refute(theorems, deadline=context.deadline)
        except ReconstructionFailure as e:
            raise TacticFailure("no contradiction") from e
        return _closed(goal, CONTR(goal.conclusion, falsity))


class ItautTac(Tactic):
    """Classical propositional tautology checking, quantified subformulas taken as atoms."""

    tactic_id = TacticId.ITAUT_TAC
    arity = ArityClass.no_args

    def exec(self, goal, args, context):
        theorems = [ASSUME(h) for h in goal.hyps] + [ASSUME(mk_neg(goal.conclusion))]
        try:
            falsity = refute(theorems, deadline=context.deadline)
        except ReconstructionFailure as e:
            raise TacticFailure("not a tautology") from e
        return _closed(goal, CCONTR(goal.conclusion, falsity))


TACTICS: dict[TacticId, Tactic] = {
    tactic.tactic_id: tactic
    for tactic in (
        AcceptTac(),
        ReflTac(),
        ConjTac(),
        Disj1Tac(),
        Disj2Tac(),
        DischTac(),
        UndischTac0(),
        GenTac(),
        EqTac(),
        MatchMpTac(),
        MpTac(),
        RewriteTac(),
        AsmRewriteTac(),
        PureOnceRewriteTac(),
        MesonTac(),
        AsmMesonTac(),
        ContrTac(),
        ItautTac(),
    )
}


def registered_tactics(settings: Settings | None = None) -> list[TacticId]:
    """The configured tactic list, in configuration order."""

    settings = settings or get_settings()
    return [TacticId(name) for name in settings.tactics]


def arity_of(tactic: TacticId | str) -> ArityClass:
    return TACTICS[TacticId(tactic)].arity


def apply_tactic(
        goal: Goal,
        tactic: TacticId | str,
        args: Sequence[Theorem] = (),
        budget: float | None = None,
        settings: Settings | None = None,
) -> TacticResult:
    """
    Apply one tactic to one goal.

    Args:
        goal: goal to work on
        tactic: tactic identifier
        args: theorem arguments, empty for NO_ARGS tactics
        budget: wall-clock seconds for this call, defaulting to the configured tactic timeout
        settings: configuration supplying the default limits

    Returns:
        SUCCESS with subgoals and justification, FAILURE with a reason, or TIMEOUT
    """

    settings = settings or get_settings()
    if budget is None:
        budget = settings.tactic_timeout_s
    if budget <= 0:
        raise ValueError(f"tactic budget must be positive, got {budget}")

    try:
        impl = TACTICS[TacticId(tactic)]
    except ValueError:
        return TacticResult.failure(f"unknown tactic {tactic}")

    args = list(args)
    if impl.arity == ArityClass.no_args and args:
        return TacticResult.failure(f"{impl} takes no arguments")
    if impl.requires_args and not args:
        return TacticResult.failure(f"{impl} needs at least one theorem argument")
    if any(not th.hyp_keys() <= goal.hyp_keys() for th in args):
        return TacticResult.failure("argument hypotheses are not among the goal's")

    context = TacticContext(Deadline(budget), settings.meson_max_depth, settings.rewrite_step_cap)
    try:
        result = impl.exec(goal, args, context)
    except TacticFailure as e:
        result = TacticResult.failure(str(e))
    except DeadlineExceeded:
        result = TacticResult.timeout()
    except RewriteLimitExceeded as e:
        result = TacticResult.failure(str(e))
    except KernelError as e:
        result = TacticResult.failure(f"{type(e).__name__}: {e}")

    logger.debug(f"{impl} on {goal!r}: {result.outcome.value} {result.reason}")
    return result
