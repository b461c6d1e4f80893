import numpy as np
import pytest

from tacticforge.data.examples import TrainingExample
from tacticforge.data.splits import Split
from tacticforge.errors import CorruptCheckpoint
from tacticforge.kernel.terms import Abs, Var, mk_eq
from tacticforge.kernel.types import BOOL
from tacticforge.policy.action_generator import LearnedPolicy, ranked
from tacticforge.policy.baseline import FrequencyTfidfPolicy, MesonPolicy, TfidfIndex
from tacticforge.policy.checkpoint import (
    load_checkpoint,
    load_premise_cache,
    premise_cache_path,
    save_checkpoint,
    save_premise_cache,
)
from tacticforge.policy.encoder import bag_of_tokens, token_ids
from tacticforge.policy.model import (
    PolicyModel,
    PolicyVariant,
    PreparedExample,
    init_params,
    loss_and_gradients,
)
from tacticforge.policy.training import PremiseIndex, Trainer, prepare_example, proxy_metrics
from tacticforge.service.protocol import GoalPayload
from tacticforge.tactics.goal import Goal
from tacticforge.tactics.library import ArityClass, arity_of, registered_tactics


TACTICS = ["REFL_TAC", "REWRITE_TAC", "MESON_TAC"]


@pytest.fixture
def small_settings(settings):
    return settings.model_copy(update=dict(embedding_dim=8, hash_buckets=64, combiner_width=8))


def _batch():
    ids = [np.array(i) for i in ([1, 2, 3], [4, 5], [6, 2, 7, 7], [8])]
    return [
        PreparedExample(ids[0], 1, [ids[1], None], [ids[2], ids[3]]),
        PreparedExample(ids[2], 0, [], []),
        PreparedExample(ids[3], 2, [None], [ids[0]]),
    ]


@pytest.mark.parametrize("variant", list(PolicyVariant))
def test_gradients_match_finite_differences(variant):
    params = init_params(dim=4, buckets=10, width=5, n_tactics=3, seed=3)
    params["goal_b"] += 0.05
    params["premise_b"] += 0.05
    batch = _batch()
    _, grads, _ = loss_and_gradients(params, variant, batch)

    rng = np.random.default_rng(0)
    eps = 1e-6
    for name, value in params.items():
        flat = value.reshape(-1)
        for index in rng.choice(flat.size, size=min(4, flat.size), replace=False):
            saved = flat[index]
            flat[index] = saved + eps
            up, _, _ = loss_and_gradients(params, variant, batch)
            flat[index] = saved - eps
            down, _, _ = loss_and_gradients(params, variant, batch)
            flat[index] = saved
            numeric = (up - down) / (2 * eps)
            assert grads[name].reshape(-1)[index] == pytest.approx(numeric, rel=1e-4, abs=1e-6), name


def test_unconditioned_variant_ignores_tactic_table():
    params = init_params(dim=4, buckets=10, width=5, n_tactics=3)
    _, grads, _ = loss_and_gradients(params, PolicyVariant.unconditioned, _batch())
    assert not grads["tactic_table"].any()


def test_trainer_overfits_one_example(settings):
    fast = settings.model_copy(update=dict(learning_rate=0.2, ema_rate=0.9))
    model = PolicyModel(init_params(dim=8, buckets=32, width=8, n_tactics=3, seed=1), TACTICS)
    trainer = Trainer(model, fast)
    batch = [_batch()[0]]
    first = trainer.train_prepared(batch).loss
    for _ in range(300):
        last = trainer.train_prepared(batch).loss
    assert last < 0.5 * first
    assert model.step == 301

    scores, empty = model.rank_arguments(model.encode_goal(Var("unused", BOOL)), "REWRITE_TAC", np.zeros((0, 8)))
    assert scores.shape == (0,)
    assert np.isfinite(empty)


def test_averaged_model_tracks_parameters(settings):
    model = PolicyModel(init_params(dim=4, buckets=10, width=5, n_tactics=3), TACTICS)
    trainer = Trainer(model, settings.model_copy(update=dict(learning_rate=0.1)))
    before = model.params["head_b"].copy()
    trainer.train_prepared(_batch())
    averaged = trainer.averaged_model()
    assert averaged.step == model.step
    assert not np.allclose(averaged.params["head_b"], model.params["head_b"])
    assert not np.allclose(averaged.params["head_b"], before)


def test_checkpoint_round_trip(tmp_path, small_settings):
    model = PolicyModel.create(TACTICS, PolicyVariant.unconditioned, small_settings, seed=2)
    model.step = 17
    averaged = {name: value + 1.0 for name, value in model.params.items()}
    path = save_checkpoint(model, tmp_path / "checkpoints" / "m.ckpt", averaged)

    raw = load_checkpoint(path, averaged=False)
    assert raw.tactics == TACTICS
    assert raw.variant == PolicyVariant.unconditioned
    assert raw.step == 17
    for name, value in model.params.items():
        np.testing.assert_allclose(raw.params[name], value, rtol=1e-6, atol=1e-6)

    smoothed = load_checkpoint(path)
    np.testing.assert_allclose(smoothed.params["head_b"], averaged["head_b"], rtol=1e-6)


def test_corrupt_checkpoints(tmp_path, small_settings):
    path = save_checkpoint(PolicyModel.create(TACTICS, settings=small_settings), tmp_path / "m.ckpt")
    data = path.read_bytes()

    path.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(path)
    path.write_bytes(data[:-3])
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(path)
    path.write_bytes(data + b"\0")
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(path)


def test_premise_cache_matches_fresh_embeddings(seed_registry, small_settings, tmp_path):
    model = PolicyModel.create(TACTICS, settings=small_settings, seed=5)
    model.step = 3
    candidates = seed_registry.fingerprints()[:5]
    LearnedPolicy(model, seed_registry).precompute(candidates)
    checkpoint = save_checkpoint(model, tmp_path / "m.ckpt")
    cache = save_premise_cache(model, premise_cache_path(checkpoint))
    assert cache.name == "m.premises.npz"

    cached = load_checkpoint(checkpoint)
    assert load_premise_cache(cached, cache) == 5
    fresh = load_checkpoint(checkpoint)
    for fp in candidates:
        conclusion = seed_registry.get(fp).conclusion
        np.testing.assert_allclose(
            cached.encode_premise(conclusion, fp), fresh.encode_premise(conclusion), rtol=1e-5, atol=1e-6
        )

    fresh.step += 1
    assert load_premise_cache(fresh, cache) == 0


def test_token_ids_ignore_bound_variable_names():
    x, y = Var("x", BOOL), Var("y", BOOL)
    assert list(token_ids(Abs(x, mk_eq(x, x)), 128)) == list(token_ids(Abs(y, mk_eq(y, y)), 128))
    assert not bag_of_tokens(np.ones((4, 3)), np.array([], dtype=np.int64)).any()


def test_ranked_breaks_ties_by_index():
    assert list(ranked(np.array([1.0, 3.0, 1.0, 3.0]))) == [1, 3, 0, 2]


def test_learned_policy_action_list(seed_registry, small_settings):
    tactics = [t.value for t in registered_tactics(small_settings)]
    model = PolicyModel.create(tactics, settings=small_settings)
    policy = LearnedPolicy(model, seed_registry)
    candidates = seed_registry.fingerprints()[:10]
    goal = Goal([], seed_registry.by_name("ADD_0").conclusion)

    actions = policy.action_list(goal, candidates, 3)
    assert sorted(a.tactic for a in actions) == sorted(tactics)
    logits = policy.rank_tactics(goal)
    assert [a.tactic for a in actions] == [tactics[i] for i in ranked(logits)]
    for action in actions:
        assert len(action.args) <= 3
        assert set(action.args) <= set(candidates)
        if arity_of(action.tactic) == ArityClass.no_args:
            assert action.args == ()

    policy.precompute(candidates)
    assert set(model.cached_premises()) == set(candidates)


def test_tfidf_prefers_matching_premise(seed_registry):
    index = TfidfIndex(seed_registry)
    target = seed_registry.fingerprint_of("SUC_INJ")
    others = [fp for fp in seed_registry.fingerprints() if fp != target][:20]
    candidates = others + [target]
    scores = index.scores(seed_registry.get(target).conclusion, candidates)
    assert int(np.argmax(scores)) == len(candidates) - 1
    assert scores[-1] == pytest.approx(1.0)


def test_frequency_policy_orders_tactics_by_count(seed_registry, settings):
    policy = FrequencyTfidfPolicy(seed_registry, {"ITAUT_TAC": 5, "GEN_TAC": 9}, settings)
    assert policy.tactic_order()[:2] == ["GEN_TAC", "ITAUT_TAC"]
    assert policy.tactic_order()[2] == registered_tactics(settings)[0].value
    actions = policy.action_list(Goal([], Var("p", BOOL)), [], 4)
    assert all(a.args == () for a in actions)


def test_meson_policy_has_one_action():
    actions = MesonPolicy().action_list(Goal([], Var("p", BOOL)), [1, 2, 3], 8)
    assert [(a.tactic, a.args) for a in actions] == [("ASM_MESON_TAC", ())]


def _example(seed_registry, tactic, args=(), negatives=()):
    goal = Goal([], seed_registry.by_name("ADD_0").conclusion)
    return TrainingExample(
        goal=GoalPayload.from_goal(goal),
        tactic=tactic,
        args=[str(a) for a in args],
        negative_args=[str(a) for a in negatives],
        split=Split.train,
        theorem="ADD_0",
    )


def test_prepare_example_builds_ranking_pairs(seed_registry, small_settings):
    model = PolicyModel.create(TACTICS, settings=small_settings)
    premises = PremiseIndex(seed_registry, model.buckets)
    rng = np.random.default_rng(0)
    fps = seed_registry.fingerprints()
    env = seed_registry.env

    prepared = prepare_example(_example(seed_registry, "REFL_TAC"), model, premises, rng, 4, env)
    assert prepared.positives == [] and prepared.negatives == []

    prepared = prepare_example(_example(seed_registry, "REWRITE_TAC", [fps[0]], [fps[1]]), model, premises, rng, 4, env)
    assert len(prepared.positives) == 1
    assert len(prepared.negatives) == 1 + 4 + 1
    assert prepared.negatives[-1] is None

    prepared = prepare_example(_example(seed_registry, "REWRITE_TAC"), model, premises, rng, 2, env)
    assert prepared.positives == [None]

    assert prepare_example(_example(seed_registry, "GEN_TAC"), model, premises, rng, 2, env) is None


def test_fit_and_proxy_metrics(seed_registry, small_settings):
    model = PolicyModel.create(TACTICS, settings=small_settings)
    premises = PremiseIndex(seed_registry, model.buckets)
    fps = seed_registry.fingerprints()
    examples = [_example(seed_registry, "REWRITE_TAC", [fps[0]]), _example(seed_registry, "REFL_TAC")]
    trainer = Trainer(model, small_settings)
    steps, loss = trainer.fit(examples, premises, seed_registry.env, 5, 4, np.random.default_rng(0))
    assert steps == 5
    assert np.isfinite(loss)

    assert trainer.train_step([_example(seed_registry, "GEN_TAC")], premises, seed_registry.env) is None
    report = trainer.train_step(examples, premises, seed_registry.env)
    assert report.step == model.step == 6

    metrics = proxy_metrics(model, examples, premises, seed_registry.env)
    assert metrics.examples == 2
    assert metrics.ranking_pairs == 1
    assert 0.0 <= metrics.tactic_accuracy <= 1.0
