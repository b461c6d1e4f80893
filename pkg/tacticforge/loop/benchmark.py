"""
End-to-end proving over a split with a fixed policy.
"""
import logging
import time

from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel

from tacticforge.data.examples import extract_examples
from tacticforge.data.splits import Split, SplitAssignment, assign_splits, check_unlocked
from tacticforge.errors import NotFound, UnknownFingerprint
from tacticforge.loop.rounds import LoopTarget
from tacticforge.policy.action_generator import ActionGenerator, LearnedPolicy
from tacticforge.policy.baseline import FrequencyTfidfPolicy, MesonPolicy
from tacticforge.policy.checkpoint import load_checkpoint, load_premise_cache, premise_cache_path
from tacticforge.search.bfs import bfs_prove
from tacticforge.search.options import ProverOptions
from tacticforge.search.proof_log import ProofLog, ProofSource, SearchOutcome, proof_log_path
from tacticforge.service.client import LocalProofAssistant
from tacticforge.service.protocol import GoalPayload
from tacticforge.service.registry import TheoremRegistry
from tacticforge.settings import Settings, get_settings
from tacticforge.tactics.goal import Goal


logger = logging.getLogger(__name__)


class PolicyKind(str, Enum):
    baseline_meson = "baseline-meson"
    baseline_tfidf = "baseline-tfidf"
    learned = "learned"


class AttemptResult(BaseModel):
    target: str
    fingerprint: str
    outcome: SearchOutcome
    nodes: int = 0
    log_file: str | None = None


class BenchReport(BaseModel):
    kind: str = "bench"
    policy: PolicyKind
    split: Split
    attempted: int
    proved: int
    fraction: float
    proved_targets: list[str] = []


def make_policy(
        kind: PolicyKind,
        registry: TheoremRegistry,
        human_logs: Sequence[ProofLog] = (),
        checkpoint: Path | None = None,
        settings: Settings | None = None,
) -> ActionGenerator:
    """
    Build a bench policy. The TF-IDF baseline takes its tactic frequencies
    from the TRAIN human proofs; the learned policy needs a checkpoint.

    Raises:
        NotFound: `learned` without an existing checkpoint
    """

    settings = settings or get_settings()
    kind = PolicyKind(kind)
    if kind == PolicyKind.baseline_meson:
        return MesonPolicy()
    if kind == PolicyKind.baseline_tfidf:
        splits = assign_splits(entry.fingerprint for entry in registry)
        train = [ex for ex in extract_examples(human_logs, splits) if ex.split == Split.train]
        return FrequencyTfidfPolicy.from_examples(registry, train, settings)
    if checkpoint is None or not Path(checkpoint).exists():
        raise NotFound(f"the learned policy needs a checkpoint, none at {checkpoint}")
    model = load_checkpoint(Path(checkpoint))
    cache = premise_cache_path(Path(checkpoint))
    if cache.exists():
        logger.info(f"Loaded {load_premise_cache(model, cache)} premise embeddings from {cache}")
    return LearnedPolicy(model, registry)


def theorem_target(registry: TheoremRegistry, name: str) -> LoopTarget:
    """
    Raises:
        NotFound: no theorem of that name is registered
    """

    try:
        fp = registry.fingerprint_of(name)
    except UnknownFingerprint as e:
        raise NotFound(f"no theorem named {name}") from e
    theorem = registry.get(fp)
    goal = GoalPayload.from_goal(Goal(theorem.hyps, theorem.conclusion))
    return LoopTarget(label=name, goal=goal, fingerprint=str(fp), owner=str(fp))


def split_targets(human_logs: Sequence[ProofLog], splits: SplitAssignment, split: Split) -> list[LoopTarget]:
    """Theorems with a human proof in `split`, in log order."""

    return [
        LoopTarget(label=log.name, goal=log.root, fingerprint=log.summary.fingerprint, owner=log.summary.fingerprint)
        for log in human_logs
        if splits.split(int(log.summary.fingerprint)) == split
    ]


def prove_target(
        registry: TheoremRegistry,
        target: LoopTarget,
        policy: ActionGenerator,
        options: ProverOptions,
        log_dir: Path | None = None,
        settings: Settings | None = None,
) -> AttemptResult:
    """
    Search for a proof of one target with the theorems registered before it
    as candidate arguments; a found proof is written to `log_dir`.
    """

    settings = settings or get_settings()
    journal = registry.fingerprints()
    owner = int(target.owner)
    candidates = journal[:journal.index(owner)] if owner in registry else journal
    with LocalProofAssistant(registry, settings) as assistant:
        result = bfs_prove(
            target.goal.to_goal(registry.env),
            options,
            policy,
            assistant,
            candidates,
            theorem=target.label,
            source=ProofSource.loop,
        )

    log_file = None
    if result.proved and log_dir is not None:
        log_file = str(result.log.write(proof_log_path(log_dir, target.label)))
    logger.info(f"{target.label}: {result.outcome.value} after {len(result.graph.nodes)} nodes")
    return AttemptResult(
        target=target.label,
        fingerprint=target.fingerprint,
        outcome=result.outcome,
        nodes=len(result.graph.nodes),
        log_file=log_file,
    )


def run_bench(
        registry: TheoremRegistry,
        human_logs: Sequence[ProofLog],
        split: Split,
        policy_kind: PolicyKind,
        options: ProverOptions,
        checkpoint: Path | None = None,
        log_dir: Path | None = None,
        workers: int = 1,
        unlock_test: bool = False,
        settings: Settings | None = None,
) -> BenchReport:
    """
    Attempt every theorem of a split once and report the proved fraction.

    Raises:
        LockedSplit: TEST without `unlock_test`
    """

    check_unlocked(split, unlock_test)
    settings = settings or get_settings()
    start = time.monotonic()
    splits = assign_splits(entry.fingerprint for entry in registry)
    targets = split_targets(human_logs, splits, split)
    policy = make_policy(policy_kind, registry, human_logs, checkpoint, settings)
    if isinstance(policy, LearnedPolicy):
        policy.precompute(registry.fingerprints())

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(
            lambda t: prove_target(registry, t, policy, options, log_dir, settings), targets
        ))

    proved = [r.target for r in results if r.outcome == SearchOutcome.proved]
    report = BenchReport(
        policy=policy_kind,
        split=split,
        attempted=len(targets),
        proved=len(proved),
        fraction=len(proved) / len(targets) if targets else 0.0,
        proved_targets=proved,
    )
    logger.info(
        f"{policy_kind.value} on {split.value}: {report.proved}/{report.attempted} proved "
        f"in {time.monotonic() - start:.1f}s"
    )
    return report
