"""
Training of the two-tower ranker.
"""
import logging

from typing import Sequence

import numpy as np

from pydantic import BaseModel

from tacticforge.data.examples import TrainingExample
from tacticforge.errors import NonFiniteLoss
from tacticforge.policy.encoder import bag_of_tokens, token_ids
from tacticforge.policy.model import (
    Params,
    PolicyModel,
    PreparedExample,
    loss_and_gradients,
)
from tacticforge.service.registry import TheoremRegistry
from tacticforge.settings import Settings, get_settings
from tacticforge.tactics.library import ArityClass, arity_of


logger = logging.getLogger(__name__)


DROPOUT_RATE = 0.3
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


class PremiseIndex:
    """Token ids of registered theorems, for building training batches."""

    def __init__(self, registry: TheoremRegistry, buckets: int):
        self._ids: dict[int, np.ndarray] = {}
        for entry in registry:
            self._ids[entry.fingerprint] = token_ids(entry.theorem.conclusion, buckets)
        self.fingerprints = sorted(self._ids)

    def __contains__(self, fp: int) -> bool:
        return fp in self._ids

    def __len__(self):
        return len(self._ids)

    def ids(self, fp: int) -> np.ndarray:
        return self._ids[fp]


def prepare_example(
        example: TrainingExample,
        model: PolicyModel,
        premises: PremiseIndex,
        rng: np.random.Generator,
        random_negatives: int,
        env,
) -> PreparedExample | None:
    """
    Positives are the kept arguments, or the empty-list marker when there are
    none. Negatives are the pruned arguments plus uniformly drawn other
    premises, plus the empty-list marker when arguments were kept. Tactics
    taking no arguments get no ranking pairs.
    """

    if example.tactic not in model.tactics:
        return None
    goal = example.goal.to_goal(env)
    goal_ids = token_ids(goal.conclusion, model.buckets)
    tactic = model.tactic_index(example.tactic)
    if arity_of(example.tactic) == ArityClass.no_args:
        return PreparedExample(goal_ids, tactic, [], [])

    args = [int(fp) for fp in example.args if int(fp) in premises]
    hard = [int(fp) for fp in example.negative_args if int(fp) in premises]
    excluded = set(args) | set(hard)
    pool = [fp for fp in premises.fingerprints if fp not in excluded]
    drawn = []
    if pool and random_negatives > 0:
        picks = rng.choice(len(pool), size=min(random_negatives, len(pool)), replace=False)
        drawn = [pool[int(i)] for i in sorted(picks)]

    positives = [premises.ids(fp) for fp in args] or [None]
    negatives = [premises.ids(fp) for fp in hard + drawn]
    if args:
        negatives.append(None)
    return PreparedExample(goal_ids, tactic, positives, negatives)


class TrainStepReport(BaseModel):
    step: int
    loss: float
    learning_rate: float


class Trainer:
    """
    Gradient descent with exponentially decaying learning rate and an
    exponential moving average of the parameters for evaluation. Adam and
    dropout are optional.
    """

    def __init__(
            self,
            model: PolicyModel,
            settings: Settings | None = None,
            adam: bool = False,
            dropout: bool = False,
            seed: int = 0,
    ):
        settings = settings or get_settings()
        self.model = model
        self.learning_rate = settings.learning_rate
        self.decay_rate = settings.lr_decay_rate
        self.decay_steps = settings.lr_decay_steps
        self.ema_rate = settings.ema_rate
        self.random_negatives = settings.random_negatives
        self.dropout = DROPOUT_RATE if dropout else 0.0
        self.adam = adam
        self.rng = np.random.default_rng(seed)
        self.average: Params = {name: value.copy() for name, value in model.params.items()}
        self._moments: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        self.flagged: list[list[TrainingExample]] = []

    def current_rate(self) -> float:
        return self.learning_rate * self.decay_rate ** (self.model.step / self.decay_steps)

    def _apply(self, grads: Params, rate: float) -> None:
        step = self.model.step + 1
        for name, grad in grads.items():
            param = self.model.params[name]
            if self.adam:
                m, v = self._moments.get(name, (np.zeros_like(grad), np.zeros_like(grad)))
                m = ADAM_BETAS[0] * m + (1 - ADAM_BETAS[0]) * grad
                v = ADAM_BETAS[1] * v + (1 - ADAM_BETAS[1]) * grad * grad
                self._moments[name] = (m, v)
                m_hat = m / (1 - ADAM_BETAS[0] ** step)
                v_hat = v / (1 - ADAM_BETAS[1] ** step)
                param -= rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
            else:
                param -= rate * grad

        # averaging warms up as (1 + n) / (10 + n) until it reaches the configured rate
        decay = min(self.ema_rate, (1 + step) / (10 + step))
        for name, param in self.model.params.items():
            self.average[name] *= decay
            self.average[name] += (1 - decay) * param

    def train_prepared(self, batch: Sequence[PreparedExample]) -> TrainStepReport:
        """
        Raises:
            NonFiniteLoss: the loss or a gradient is not finite; parameters are left unchanged
        """

        loss, grads, _ = loss_and_gradients(
            self.model.params, self.model.variant, batch, self.dropout, self.rng
        )
        if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise NonFiniteLoss(f"non-finite loss {loss} at step {self.model.step}")
        rate = self.current_rate()
        self._apply(grads, rate)
        self.model.step += 1
        self.model.invalidate()
        return TrainStepReport(step=self.model.step, loss=loss, learning_rate=rate)

    def train_step(self, batch: Sequence[TrainingExample], premises: PremiseIndex, env) -> TrainStepReport | None:
        """One update on a batch of examples; None when nothing in the batch is usable."""

        prepared = [
            p for p in (
                prepare_example(ex, self.model, premises, self.rng, self.random_negatives, env)
                for ex in batch
            ) if p is not None
        ]
        if not prepared:
            return None
        try:
            return self.train_prepared(prepared)
        except NonFiniteLoss:
            self.flagged.append(list(batch))
            logger.warning(f"Skipped a batch of {len(batch)} examples with a non-finite loss")
            raise

    def fit(
            self,
            examples: Sequence[TrainingExample],
            premises: PremiseIndex,
            env,
            steps: int,
            batch_size: int,
            rng: np.random.Generator,
    ) -> tuple[int, float | None]:
        """
        Supervised training on uniformly drawn batches. Returns the number of
        updates made and their mean loss.
        """

        losses = []
        if not examples:
            return 0, None
        for _ in range(steps):
            picks = rng.choice(len(examples), size=batch_size, replace=batch_size > len(examples))
            try:
                report = self.train_step([examples[int(i)] for i in picks], premises, env)
            except NonFiniteLoss:
                continue
            if report is not None:
                losses.append(report.loss)
        logger.info(f"Trained {len(losses)} steps on {len(examples)} examples")
        return len(losses), float(np.mean(losses)) if losses else None

    def averaged_model(self) -> PolicyModel:
        params = {name: value.copy() for name, value in self.average.items()}
        return PolicyModel(params, self.model.tactics, self.model.variant, self.model.step)


class ProxyMetrics(BaseModel):
    examples: int
    tactic_accuracy: float
    ranking_error: float
    ranking_pairs: int


def proxy_metrics(
        model: PolicyModel,
        examples: Sequence[TrainingExample],
        premises: PremiseIndex,
        env,
        seed: int = 0,
) -> ProxyMetrics:
    """
    Tactic top-1 accuracy, and the fraction of (argument, random non-argument)
    pairs the model orders wrongly.
    """

    rng = np.random.default_rng(seed)
    hits = 0
    counted = 0
    errors = 0
    pairs = 0
    for example in examples:
        if example.tactic not in model.tactics:
            continue
        goal = example.goal.to_goal(env)
        g = model.encode_goal(goal.conclusion)
        logits = model.rank_tactics(g)
        counted += 1
        hits += int(np.argmax(logits) == model.tactic_index(example.tactic))

        args = [int(fp) for fp in example.args if int(fp) in premises]
        pool = [fp for fp in premises.fingerprints if fp not in set(args)]
        if not args or not pool:
            continue
        for fp in args:
            negative = pool[int(rng.integers(len(pool)))]
            scores, _ = model.rank_arguments(g, example.tactic, np.vstack([
                _premise(model, premises, fp), _premise(model, premises, negative)
            ]))
            errors += int(scores[0] <= scores[1])
            pairs += 1

    return ProxyMetrics(
        examples=counted,
        tactic_accuracy=hits / counted if counted else 0.0,
        ranking_error=errors / pairs if pairs else 0.0,
        ranking_pairs=pairs,
    )


def _premise(model: PolicyModel, premises: PremiseIndex, fp: int) -> np.ndarray:
    x = bag_of_tokens(model.params["tokens"], premises.ids(fp))
    return np.maximum(model.params["premise_w"] @ x + model.params["premise_b"], 0.0)
