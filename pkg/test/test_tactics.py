import numpy as np
import pytest
from unittest.mock import patch

from tacticforge.data.seed import NUM, PLUS, SUC, ZERO
from tacticforge.errors import DeadlineExceeded, RewriteLimitExceeded, RuleMismatch
from tacticforge.kernel.syntax import FALSE, TRUE, mk_conj, mk_disj, mk_forall, mk_imp, mk_neg
from tacticforge.kernel.terms import Comb, Var, list_mk_comb, mk_eq
from tacticforge.kernel.theorem import ASSUME, REFL
from tacticforge.kernel.types import ALPHA, BOOL
from tacticforge.tactics.goal import Goal, TacticOutcome, proves
from tacticforge.tactics.library import ArityClass, TacticId, apply_tactic, arity_of, registered_tactics
from tacticforge.tactics.rewriting import RewriteMode, rewrite_engine


p = Var("p", BOOL)
q = Var("q", BOOL)
r = Var("r", BOOL)
x = Var("x", ALPHA)
y = Var("y", ALPHA)
m = Var("m", NUM)
n = Var("n", NUM)


def _close(goal, result):
    """Finish a closing result and check the theorem"""
    assert result.closes_goal
    th = result.justification([])
    assert proves(th, goal)
    return th


def test_conj_tac_splits_and_justifies():
    goal = Goal([p, q], mk_conj(p, q))
    result = apply_tactic(goal, TacticId.CONJ_TAC)
    assert result.succeeded
    assert [g.conclusion for g in result.subgoals] == [p, q]

    parts = []
    for subgoal in result.subgoals:
        closing = apply_tactic(subgoal, TacticId.ACCEPT_TAC, [ASSUME(subgoal.conclusion)])
        parts.append(_close(subgoal, closing))
    th = result.justification(parts)
    assert th.conclusion == goal.conclusion
    assert proves(th, goal)


def test_justification_checks_theorem_count():
    result = apply_tactic(Goal([p, q], mk_conj(p, q)), TacticId.CONJ_TAC)
    with pytest.raises(RuleMismatch):
        result.justification([ASSUME(p)])


def test_disch_tac_on_implication_and_negation():
    result = apply_tactic(Goal([], mk_imp(p, q)), TacticId.DISCH_TAC)
    (subgoal,) = result.subgoals
    assert subgoal.has_hyp(p)
    assert subgoal.conclusion == q

    result = apply_tactic(Goal([], mk_neg(p)), TacticId.DISCH_TAC)
    (subgoal,) = result.subgoals
    assert subgoal.has_hyp(p)
    assert subgoal.conclusion == FALSE

    assert apply_tactic(Goal([], p), TacticId.DISCH_TAC).outcome == TacticOutcome.failure


def test_disch_then_accept_proves_implication():
    goal = Goal([], mk_imp(p, p))
    result = apply_tactic(goal, TacticId.DISCH_TAC)
    (subgoal,) = result.subgoals
    inner = _close(subgoal, apply_tactic(subgoal, TacticId.ACCEPT_TAC, [ASSUME(p)]))
    th = result.justification([inner])
    assert th.hyps == ()
    assert th.conclusion == mk_imp(p, p)


def test_refl_tac():
    goal = Goal([], mk_eq(x, x))
    assert _close(goal, apply_tactic(goal, TacticId.REFL_TAC)).conclusion == mk_eq(x, x)
    assert not apply_tactic(Goal([], mk_eq(x, y)), TacticId.REFL_TAC).succeeded


def test_disj_tacs_pick_a_side():
    goal = Goal([], mk_disj(p, q))
    assert apply_tactic(goal, TacticId.DISJ1_TAC).subgoals[0].conclusion == p
    assert apply_tactic(goal, TacticId.DISJ2_TAC).subgoals[0].conclusion == q


def test_undisch_tac0_moves_first_hypothesis_back():
    goal = Goal([p], q)
    (subgoal,) = apply_tactic(goal, TacticId.UNDISCH_TAC0).subgoals
    assert subgoal.hyps == ()
    assert subgoal.conclusion == mk_imp(p, q)
    assert not apply_tactic(Goal([], q), TacticId.UNDISCH_TAC0).succeeded


def test_gen_tac_renames_away_from_free_variables():
    goal = Goal([mk_eq(x, y)], mk_forall(x, mk_eq(x, x)))
    (subgoal,) = apply_tactic(goal, TacticId.GEN_TAC).subgoals
    fresh = Var("x'", ALPHA)
    assert subgoal.conclusion == mk_eq(fresh, fresh)

    closed = _close(subgoal, apply_tactic(subgoal, TacticId.REFL_TAC))
    th = apply_tactic(goal, TacticId.GEN_TAC).justification([closed])
    assert proves(th, goal)


def test_eq_tac_gives_both_implications():
    goal = Goal([], mk_eq(p, q))
    result = apply_tactic(goal, TacticId.EQ_TAC)
    assert [g.conclusion for g in result.subgoals] == [mk_imp(p, q), mk_imp(q, p)]
    assert not apply_tactic(Goal([], mk_eq(x, y)), TacticId.EQ_TAC).succeeded


def test_itaut_tac_proves_excluded_middle():
    goal = Goal([], mk_disj(p, mk_neg(p)))
    assert _close(goal, apply_tactic(goal, TacticId.ITAUT_TAC)).hyps == ()
    assert not apply_tactic(Goal([], mk_disj(p, q)), TacticId.ITAUT_TAC).succeeded


def test_contr_tac_uses_hypotheses():
    goal = Goal([p, mk_neg(p)], q)
    _close(goal, apply_tactic(goal, TacticId.CONTR_TAC))
    assert not apply_tactic(Goal([p], q), TacticId.CONTR_TAC).succeeded


def test_mp_tac_nests_antecedents_in_order():
    goal = Goal([p, q], TRUE)
    result = apply_tactic(goal, TacticId.MP_TAC, [ASSUME(p), ASSUME(q)])
    (subgoal,) = result.subgoals
    assert subgoal.conclusion == mk_imp(p, mk_imp(q, TRUE))


def test_match_mp_tac_backchains(seed_registry):
    suc_inj = seed_registry.by_name("SUC_INJ")
    hyp = mk_eq(Comb(SUC, m), Comb(SUC, n))
    goal = Goal([hyp], mk_eq(m, n))
    (subgoal,) = apply_tactic(goal, TacticId.MATCH_MP_TAC, [suc_inj]).subgoals
    assert subgoal.conclusion == hyp
    assert not apply_tactic(Goal([], p), TacticId.MATCH_MP_TAC, [suc_inj]).succeeded


def test_rewrite_tac_closes_ground_sum(seed_registry):
    lhs = list_mk_comb(PLUS, [ZERO, Comb(SUC, ZERO)])
    goal = Goal([], mk_eq(lhs, Comb(SUC, ZERO)))
    result = apply_tactic(goal, TacticId.REWRITE_TAC, [seed_registry.by_name("ADD_0")])
    assert _close(goal, result).hyps == ()


def test_rewrite_without_change_fails():
    result = apply_tactic(Goal([], p), TacticId.REWRITE_TAC)
    assert result.outcome == TacticOutcome.failure
    assert result.reason == "no change"


def test_rewrite_engine_modes():
    rules = [ASSUME(mk_eq(p, q)), ASSUME(mk_eq(q, r))]
    tm = mk_conj(p, q)

    result, th = rewrite_engine(tm, rules)
    assert result == mk_conj(r, r)
    assert th.conclusion == mk_eq(tm, result)

    result, th = rewrite_engine(tm, rules, RewriteMode.once)
    assert result == mk_conj(q, r)
    assert th.conclusion == mk_eq(tm, result)


def test_rewrite_engine_guards_against_loops():
    result, th = rewrite_engine(p, [ASSUME(mk_eq(p, mk_conj(p, p)))])
    assert result == p
    assert th.conclusion == mk_eq(p, p)

    with pytest.raises(RewriteLimitExceeded):
        rewrite_engine(p, [ASSUME(mk_eq(p, q)), ASSUME(mk_eq(q, p))], step_cap=5)


def test_asm_rewrite_tac_uses_hypotheses():
    goal = Goal([p], mk_conj(p, p))
    _close(goal, apply_tactic(goal, TacticId.ASM_REWRITE_TAC))


@pytest.mark.parametrize("tactic, args", [
    ("NO_SUCH_TAC", []),
    (TacticId.CONJ_TAC, [REFL(x)]),
    (TacticId.ACCEPT_TAC, []),
    (TacticId.MATCH_MP_TAC, []),
    (TacticId.PURE_ONCE_REWRITE_TAC, []),
])
def test_malformed_calls_fail_without_raising(tactic, args):
    result = apply_tactic(Goal([], p), tactic, args)
    assert result.outcome == TacticOutcome.failure
    assert result.subgoals == ()


def test_argument_hypotheses_must_belong_to_goal():
    result = apply_tactic(Goal([], p), TacticId.ACCEPT_TAC, [ASSUME(p)])
    assert result.outcome == TacticOutcome.failure
    assert "hypotheses" in result.reason


def test_non_positive_budget_is_rejected():
    with pytest.raises(ValueError):
        apply_tactic(Goal([], p), TacticId.ITAUT_TAC, budget=0)


def test_expired_deadline_reports_timeout():
    with patch("tacticforge.tactics.library.meson", side_effect=DeadlineExceeded("late")):
        result = apply_tactic(Goal([], p), TacticId.MESON_TAC)
    assert result.outcome == TacticOutcome.timeout


def test_asm_meson_tac_uses_hypotheses(seed_registry):
    hyp = mk_eq(Comb(SUC, m), Comb(SUC, n))
    goal = Goal([hyp], mk_eq(m, n))
    result = apply_tactic(goal, TacticId.ASM_MESON_TAC, [seed_registry.by_name("SUC_INJ")])
    _close(goal, result)


def test_registry_of_tactics(settings):
    tactics = registered_tactics(settings)
    assert len(tactics) == 18
    assert arity_of("REFL_TAC") == ArityClass.no_args
    assert arity_of(TacticId.REWRITE_TAC) == ArityClass.thm_list


def _close_with(subgoal, closers):
    for tactic in closers:
        result = apply_tactic(subgoal, tactic, budget=0.5)
        if result.closes_goal:
            return result.justification([])
    return None


def test_successful_applications_replay_to_the_goal(seed_registry, seed_logs, settings, scaled):
    """Every success on a corpus goal whose subgoals can be closed justifies the goal itself"""
    closers = [TacticId.REFL_TAC, TacticId.ITAUT_TAC, TacticId.ASM_REWRITE_TAC]
    steps = [step for log in seed_logs for step in log.steps]
    rng = np.random.default_rng(2)
    picks = rng.choice(len(steps), size=min(len(steps), scaled(20, len(steps))), replace=False)

    successes = replayed = 0
    for i in picks:
        step = steps[int(i)]
        goal = step.goal.to_goal(seed_registry.env)
        theorems = [seed_registry.get(int(a)) for a in step.args]
        for tactic in registered_tactics(settings):
            args = theorems if arity_of(tactic) == ArityClass.thm_list else []
            result = apply_tactic(goal, tactic, args, budget=0.5)
            if not result.succeeded:
                continue
            successes += 1
            parts = [_close_with(subgoal, closers) for subgoal in result.subgoals]
            if any(part is None for part in parts):
                continue
            assert proves(result.justification(parts), goal)
            replayed += 1
    assert successes > 0
    assert replayed > 0
