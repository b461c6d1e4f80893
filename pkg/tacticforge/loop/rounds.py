"""
Rounds of the reinforcement learning loop.

A round samples TRAIN targets, proves them in parallel with one frozen
policy, prunes and mines the proofs, then trains on a mix of the example
pools before the next round's policy is published.
"""
import logging
import time

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from pydantic import BaseModel

from tacticforge.data.examples import TrainingExample, examples_from_log
from tacticforge.data.pruning import prune_log
from tacticforge.data.splits import Split, SplitAssignment, assign_splits
from tacticforge.errors import AllPoolsEmpty, NonFiniteLoss
from tacticforge.loop.config import LoopConfig
from tacticforge.loop.pools import ExamplePools, mix_batch
from tacticforge.policy.action_generator import ActionGenerator, LearnedPolicy
from tacticforge.policy.baseline import FrequencyTfidfPolicy
from tacticforge.policy.checkpoint import save_checkpoint
from tacticforge.policy.model import PolicyModel
from tacticforge.policy.training import PremiseIndex, ProxyMetrics, Trainer, proxy_metrics
from tacticforge.records import append_jsonl
from tacticforge.search.bfs import bfs_prove
from tacticforge.search.options import ProverOptions, sample_options
from tacticforge.search.proof_log import ProofLog, ProofSource, SearchOutcome, proof_log_path
from tacticforge.service.client import LocalProofAssistant
from tacticforge.service.protocol import GoalPayload
from tacticforge.service.registry import TheoremRegistry
from tacticforge.settings import Settings, get_settings
from tacticforge.tactics.library import registered_tactics


logger = logging.getLogger(__name__)


class LoopTarget(BaseModel):
    """A goal the loop may try: a TRAIN theorem, or a subgoal of a TRAIN proof."""

    label: str
    goal: GoalPayload
    fingerprint: str
    owner: str


class AttemptReport(BaseModel):
    target: str
    fingerprint: str
    options: ProverOptions
    outcome: SearchOutcome
    nodes: int = 0
    elapsed_ms: int = 0
    error: str | None = None


class RoundReport(BaseModel):
    round: int
    policy: str
    checkpoint_step: int | None = None
    sampled: list[str]
    proved: list[str]
    cumulative_proved: list[str]
    attempts: list[AttemptReport]
    examples: int = 0
    training_steps: int = 0
    mean_loss: float | None = None
    pool_sizes: dict[str, int] = {}
    wall_ms: int = 0

    @property
    def proved_fraction(self) -> float:
        return len(self.proved) / len(self.sampled) if self.sampled else 0.0


class RoundMetrics(BaseModel):
    kind: str = "round"
    round: int
    policy: str
    sampled: int
    proved: int
    proved_fraction: float
    cumulative_proved: int
    cumulative_fraction: float
    examples: int
    training_steps: int
    mean_loss: float | None = None
    pool_sizes: dict[str, int] = {}
    shadow: ProxyMetrics | None = None


def targets_from_logs(
        logs: Sequence[ProofLog], splits: SplitAssignment, env, loop_on_subgoals: bool = False
) -> list[LoopTarget]:
    """
    TRAIN theorems of the human logs, in log order. With `loop_on_subgoals`
    every distinct goal of those proofs is a target, owned by its theorem.
    """

    targets = []
    seen = set()
    for log in logs:
        owner = log.summary.fingerprint
        if splits.split(int(owner)) != Split.train:
            continue
        goals = [step.goal for step in log.steps] if loop_on_subgoals else [log.root]
        for i, goal in enumerate(goals):
            fp = owner if i == 0 else str(goal.to_goal(env).fingerprint)
            if fp in seen:
                continue
            seen.add(fp)
            label = log.name if i == 0 else f"{log.name}.{i}"
            targets.append(LoopTarget(label=label, goal=goal, fingerprint=fp, owner=owner))
    return targets


class LoopState:
    """
    Everything that persists across rounds: the registry, the splits, the
    example pools, the training model and the proof record.
    """

    def __init__(
            self,
            registry: TheoremRegistry,
            human_logs: Sequence[ProofLog],
            config: LoopConfig,
            workdir: Path,
            settings: Settings | None = None,
            inherited: Sequence[TrainingExample] = (),
    ):
        self.registry = registry
        self.config = config
        self.workdir = Path(workdir)
        self.settings = settings or get_settings()
        self.splits = assign_splits(entry.fingerprint for entry in registry)
        self.human_logs = list(human_logs)
        self.targets = targets_from_logs(self.human_logs, self.splits, registry.env, config.loop_on_subgoals)

        human = [] if config.seedless else [
            ex for log in self.human_logs
            for ex in examples_from_log(log, self.splits.split(int(log.summary.fingerprint)))
            if ex.split == Split.train
        ]
        self.pools = ExamplePools(
            human, () if config.seedless else inherited, config.k, config.mix
        )
        self.validation = [
            ex for log in self.human_logs
            for ex in examples_from_log(log, self.splits.split(int(log.summary.fingerprint)))
            if ex.split == Split.valid
        ]

        tactics = [t.value for t in registered_tactics(self.settings)]
        self.model = PolicyModel.create(tactics, config.variant, self.settings, config.seed)
        self.trainer = Trainer(self.model, self.settings, seed=config.seed)
        self.shadow = None
        if config.shadow_trainer:
            shadow_model = PolicyModel.create(tactics, config.variant, self.settings, config.seed + 1)
            self.shadow = Trainer(shadow_model, self.settings, seed=config.seed + 1)
        self.premises = PremiseIndex(registry, self.model.buckets)
        self.published: PolicyModel | None = None
        self.round = 0
        self.cumulative: set[str] = set()
        self.reports: list[RoundReport] = []
        self._journal = {fp: i for i, fp in enumerate(registry.fingerprints())}

    @property
    def metrics_path(self) -> Path:
        return self.workdir / "metrics" / "loop.jsonl"

    def candidates_for(self, target: LoopTarget) -> list[int]:
        """Theorems registered before the target's owner, so no proof uses its own theorem."""

        position = self._journal.get(int(target.owner), len(self._journal))
        return [fp for fp in self.registry.fingerprints()[:position]]

    def train(self, steps: int, rng: np.random.Generator) -> tuple[int, float | None]:
        losses = []
        for _ in range(steps):
            try:
                batch = mix_batch(self.pools, self.config.batch_size, rng)
            except AllPoolsEmpty:
                logger.warning("No training examples yet; skipping training")
                break
            try:
                report = self.trainer.train_step(batch, self.premises, self.registry.env)
            except NonFiniteLoss:
                continue
            if report is not None:
                losses.append(report.loss)
        return len(losses), float(np.mean(losses)) if losses else None

    def train_shadow(self, steps: int, rng: np.random.Generator) -> ProxyMetrics | None:
        """Train the shadow model on loop output only; it is never used for proving."""

        if self.shadow is None:
            return None
        loop_examples = self.pools.loop_examples()
        if loop_examples:
            for _ in range(steps):
                picks = rng.choice(len(loop_examples), size=self.config.batch_size, replace=True)
                try:
                    self.shadow.train_step([loop_examples[int(i)] for i in picks], self.premises, self.registry.env)
                except NonFiniteLoss:
                    continue
        return proxy_metrics(
            self.shadow.averaged_model(), self.validation, self.premises, self.registry.env, self.config.seed
        )

    def publish(self, label: str | None = None) -> PolicyModel:
        """Freeze the averaged parameters as the policy for the next round."""

        label = label or f"round_{self.round:04d}"
        self.published = self.trainer.averaged_model()
        save_checkpoint(
            self.model,
            self.workdir / "checkpoints" / f"{label}.ckpt",
            averaged=self.trainer.average,
        )
        return self.published

    def policy(self) -> ActionGenerator:
        if self.published is None:
            return FrequencyTfidfPolicy(self.registry, settings=self.settings)
        return LearnedPolicy(self.published, self.registry)


def _attempt(
        state: LoopState,
        policy: ActionGenerator,
        target: LoopTarget,
        options: ProverOptions,
        round: int,
) -> tuple[AttemptReport, ProofLog | None]:
    with LocalProofAssistant(state.registry, state.settings) as assistant:
        result = bfs_prove(
            target.goal.to_goal(state.registry.env),
            options,
            policy,
            assistant,
            state.candidates_for(target),
            theorem=target.label,
            source=ProofSource.loop,
            round=round,
        )
        log = None
        if result.proved:
            log = prune_log(result.log, assistant, options.tactic_timeout_s)
    report = AttemptReport(
        target=target.label,
        fingerprint=target.fingerprint,
        options=options,
        outcome=result.outcome,
        nodes=len(result.graph.nodes),
        elapsed_ms=result.elapsed_ms,
    )
    return report, log


def run_round(state: LoopState, sample_size: int | None = None, fleet_size: int | None = None) -> RoundReport:
    """
    One round: sample TRAIN targets uniformly, prove them with the published
    policy on a fleet of workers, turn pruned proofs into LOOP examples,
    then train and publish the next policy.

    A worker that raises is recorded as a failed attempt; the round goes on.
    """

    config = state.config
    sample_size = sample_size or config.sample_size
    fleet_size = fleet_size or config.fleet_size
    round = state.round
    start = time.monotonic()
    rng = np.random.default_rng([config.seed, round])

    count = min(sample_size, len(state.targets))
    picks = sorted(int(i) for i in rng.choice(len(state.targets), size=count, replace=False)) if count else []
    sampled = [state.targets[i] for i in picks]
    base = ProverOptions(
        node_budget=config.node_budget,
        total_timeout_s=config.total_timeout_s,
        tactic_timeout_s=config.tactic_timeout_s,
    )
    options = [sample_options(int(seed), base) for seed in rng.integers(0, 2**31 - 1, size=len(sampled))]

    policy = state.policy()
    if isinstance(policy, LearnedPolicy):
        policy.precompute(state.registry.fingerprints())
    logger.info(f"Round {round}: proving {len(sampled)} targets with {policy.name} on {fleet_size} workers")

    with ThreadPoolExecutor(max_workers=fleet_size) as pool:
        futures = [pool.submit(_attempt, state, policy, t, o, round) for t, o in zip(sampled, options)]
        outcomes = []
        for target, opts, future in zip(sampled, options, futures):
            try:
                outcomes.append(future.result())
            except Exception as e:
                logger.warning(f"Round {round}: attempt on {target.label} crashed: {e}")
                outcomes.append((AttemptReport(
                    target=target.label,
                    fingerprint=target.fingerprint,
                    options=opts,
                    outcome=SearchOutcome.failed,
                    error=f"{type(e).__name__}: {e}",
                ), None))

    attempts = [report for report, _ in outcomes]
    examples = []
    proved = []
    for target, (report, log) in zip(sampled, outcomes):
        if log is None:
            continue
        proved.append(target.fingerprint)
        log.write(proof_log_path(state.workdir / "logs" / f"round_{round:04d}", target.label))
        examples.extend(examples_from_log(log, state.splits.split(int(target.owner))))
    state.cumulative.update(proved)
    state.pools.add_round(round, examples)

    steps, mean_loss = state.train(config.train_steps, rng)
    shadow = state.train_shadow(config.train_steps, rng)
    checkpoint_step = state.published.step if state.published is not None else None
    state.publish()

    report = RoundReport(
        round=round,
        policy=policy.name,
        checkpoint_step=checkpoint_step,
        sampled=[t.fingerprint for t in sampled],
        proved=proved,
        cumulative_proved=sorted(state.cumulative),
        attempts=attempts,
        examples=len(examples),
        training_steps=steps,
        mean_loss=mean_loss,
        pool_sizes=state.pools.sizes(),
        wall_ms=int((time.monotonic() - start) * 1000),
    )
    append_jsonl(state.metrics_path, RoundMetrics(
        round=round,
        policy=policy.name,
        sampled=len(sampled),
        proved=len(proved),
        proved_fraction=report.proved_fraction,
        cumulative_proved=len(state.cumulative),
        cumulative_fraction=len(state.cumulative) / len(state.targets) if state.targets else 0.0,
        examples=len(examples),
        training_steps=steps,
        mean_loss=mean_loss,
        pool_sizes=report.pool_sizes,
        shadow=shadow,
    ))
    logger.info(
        f"Round {round}: proved {len(proved)}/{len(sampled)}, cumulative {len(state.cumulative)}, "
        f"{len(examples)} new examples, {steps} training steps"
    )
    state.reports.append(report)
    state.round += 1
    return report


def run_loop(state: LoopState, rounds: int | None = None) -> list[RoundReport]:
    """
    Supervised training on the human pool (unless seedless), then the
    configured number of rounds. Seedless runs start from the baseline
    policy, seeded runs from the supervised checkpoint.
    """

    config = state.config
    if not config.seedless and config.pretrain_steps:
        steps, loss = state.train(config.pretrain_steps, np.random.default_rng(config.seed))
        logger.info(f"Supervised pretraining: {steps} steps, mean loss {loss}")
        state.publish("supervised")
    for _ in range(config.rounds if rounds is None else rounds):
        run_round(state)
    return state.reports
