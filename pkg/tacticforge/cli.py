import functools
import logging
import typer
from pathlib import Path
from pydantic import BaseModel
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from typing import Annotated, NoReturn, Optional

import numpy as np

from tacticforge.checker.checking import check_corpus
from tacticforge.data.examples import extract_examples, read_examples, write_examples
from tacticforge.data.pruning import prune_log
from tacticforge.data.seed import seed_theory
from tacticforge.data.splits import Split, assign_splits, check_unlocked, split_of
from tacticforge.data.stats import corpus_stats
from tacticforge.data.theory_loading import load_theory
from tacticforge.data.theory_parsing import read_theory, write_theory
from tacticforge.errors import AllPoolsEmpty, LockedSplit, NotFound, TacticForgeError
from tacticforge.loop.benchmark import (
    AttemptResult,
    BenchReport,
    PolicyKind,
    make_policy,
    prove_target,
    run_bench,
    theorem_target,
)
from tacticforge.loop.config import read_loop_config
from tacticforge.loop.rounds import LoopState, RoundMetrics, run_loop
from tacticforge.policy.action_generator import LearnedPolicy
from tacticforge.policy.checkpoint import premise_cache_path, save_checkpoint, save_premise_cache
from tacticforge.policy.model import PolicyModel, PolicyVariant
from tacticforge.policy.training import PremiseIndex, ProxyMetrics, Trainer, proxy_metrics
from tacticforge.records import read_jsonl, save_model_to_json, write_jsonl
from tacticforge.search.options import ProverOptions, sample_options
from tacticforge.search.proof_log import proof_log_path, read_proof_logs
from tacticforge.service.client import LocalProofAssistant
from tacticforge.service.registry import TheoremRegistry
from tacticforge.service.server import serve
from tacticforge.service.snapshot import load_snapshot, save_snapshot
from tacticforge.settings import get_settings
from tacticforge.tactics.library import registered_tactics
from tacticforge.utils import make_workdir_dir, make_workdir_path

tacticforge = typer.Typer()

logging.basicConfig(
    level=logging.INFO,
    format="%(name)s - %(asctime)s - %(levelname)s - %(message)s",
    datefmt="[%X]",
    handlers=[RichHandler(rich_tracebacks=True)]
)
logger = logging.getLogger()

settings = get_settings()

console = Console()

SNAPSHOT_LABEL = "registry"
SNAPSHOT_SUFFIX = ".snapshot"
HUMAN_LOGS = "human"


class LoadMetrics(BaseModel):
    kind: str = "load"
    source: str
    types: int
    constants: int
    definitions: int
    axioms: int
    theorems: int
    snapshot: str


class SplitMetrics(BaseModel):
    kind: str = "split"
    counts: dict[str, int]


class ExtractMetrics(BaseModel):
    kind: str = "extract"
    logs: int
    examples: dict[str, int]


class PruneMetrics(BaseModel):
    kind: str = "prune"
    logs: int
    arguments_before: int
    arguments_after: int


class CheckMetrics(BaseModel):
    kind: str = "check"
    checked: int
    failed: int


class TrainMetrics(BaseModel):
    kind: str = "train"
    steps: int
    mean_loss: float | None = None
    train_examples: int
    checkpoint: str
    validation: ProxyMetrics


def _fail(error: Exception, code: int) -> NoReturn:
    message = " ".join(str(error).split())
    typer.echo(f"error: {type(error).__name__}: {message}", err=True)
    raise typer.Exit(code)


def reports_errors(command):
    """Turn tacticforge errors into a one-line message and exit status 1, or 3 for a locked split."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except LockedSplit as e:
            _fail(e, 3)
        except TacticForgeError as e:
            _fail(e, 1)

    return wrapper


def _write_metrics(metrics_out: Optional[Path], records: list[BaseModel]) -> None:
    if metrics_out is not None:
        write_jsonl(metrics_out, records)


def _snapshot_path(workdir: Path) -> Path:
    return settings.snapshot or make_workdir_path("theory", SNAPSHOT_LABEL, SNAPSHOT_SUFFIX, workdir)


def _open_registry(workdir: Path) -> TheoremRegistry:
    path = _snapshot_path(workdir)
    if not path.exists():
        raise NotFound(f"no snapshot at {path}; run `tacticforge load` first")
    return load_snapshot(path)


def _human_logs(workdir: Path):
    return read_proof_logs(make_workdir_dir("logs", workdir) / HUMAN_LOGS)


def _options(node_budget: Optional[int], total_timeout: Optional[float], tactic_timeout: Optional[float]) -> ProverOptions:
    overrides = dict(node_budget=node_budget, total_timeout_s=total_timeout, tactic_timeout_s=tactic_timeout)
    return ProverOptions.from_settings(settings, **{k: v for k, v in overrides.items() if v is not None})


def _bench_table(reports: list[BenchReport]) -> Table:
    table = Table(title="Proved fraction")
    table.add_column("Policy")
    table.add_column("Split")
    table.add_column("Proved", justify="right")
    table.add_column("Attempted", justify="right")
    table.add_column("Fraction", justify="right")
    for report in reports:
        table.add_row(
            report.policy.value, report.split.value, str(report.proved), str(report.attempted), f"{report.fraction:.1%}"
        )
    return table


WorkdirOption = Annotated[
    Path,
    typer.Option(
        "--workdir",
        "-w",
        case_sensitive=False,
        help="Root of the theory, logs, examples, checkpoints and metrics directories."
    )
]
MetricsOption = Annotated[
    Optional[Path],
    typer.Option(
        "--metrics-out",
        "-m",
        case_sensitive=False,
        help="Write machine-readable metrics to this file as newline-delimited JSON."
    )
]
UnlockTestOption = Annotated[
    bool,
    typer.Option(
        "--unlock-test",
        help="Allow use of the TEST split, reserved for final assessment."
    )
]
BudgetOption = Annotated[
    Optional[int],
    typer.Option("--budget", "-b", help="Maximum number of search graph nodes per proof attempt.")
]
TimeoutOption = Annotated[
    Optional[float],
    typer.Option("--timeout", help="Total seconds per proof attempt.")
]
TacticTimeoutOption = Annotated[
    Optional[float],
    typer.Option("--tactic-timeout", help="Seconds per tactic application.")
]
WorkersOption = Annotated[
    int,
    typer.Option("--workers", "-j", help="Number of parallel workers.")
]


@tacticforge.command("serve")
@reports_errors
def serve_proof_assistant(
    socket_path: Annotated[
        Optional[Path],
        typer.Option(
            "--socket",
            "-s",
            case_sensitive=False,
            help="Unix socket to listen on. Without it, requests are read from stdin."
        )
    ] = None,
    snapshot: Annotated[
        Optional[Path],
        typer.Option(
            "--snapshot",
            case_sensitive=False,
            help="Registry snapshot to serve. Defaults to the workdir snapshot."
        )
    ] = None,
    stdio: Annotated[
        bool,
        typer.Option("--stdio", help="Serve newline-delimited JSON on stdin and stdout.")
    ] = False,
    workdir: WorkdirOption = settings.workdir,
):

    if stdio or socket_path is None:
        # stdout carries the responses
        for handler in logger.handlers:
            if isinstance(handler, RichHandler):
                handler.console = Console(stderr=True)
    serve(socket_path, snapshot or _snapshot_path(workdir), stdio, settings)


@tacticforge.command("load")
@reports_errors
def load_theory_file(
    theory_path: Annotated[
        Optional[Path],
        typer.Option(
            "--theory",
            "-t",
            case_sensitive=False,
            help="Theory file to load. If not provided, the built-in seed theory is loaded."
        )
    ] = None,
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    if theory_path is None:
        theory = seed_theory()
        write_theory(theory, make_workdir_path("theory", "seed", ".theory", workdir))
    else:
        theory = read_theory(theory_path)

    registry, loaded = load_theory(theory, settings=settings)
    snapshot = save_snapshot(registry, _snapshot_path(workdir))
    loaded.write_logs(make_workdir_dir("logs", workdir) / HUMAN_LOGS)

    metrics = LoadMetrics(
        source=loaded.source,
        types=len(loaded.types),
        constants=len(loaded.constants),
        definitions=len(loaded.definitions),
        axioms=len(loaded.axioms),
        theorems=len(loaded.theorems),
        snapshot=str(snapshot),
    )
    logger.info(
        f"Loaded {metrics.theorems} theorems, {metrics.definitions} definitions and "
        f"{metrics.axioms} axioms from {loaded.source}"
    )
    _write_metrics(metrics_out, [metrics])


@tacticforge.command("prove")
@reports_errors
def prove_theorems(
    theorem: Annotated[
        Optional[str],
        typer.Argument(help="Name of the theorem to prove.")
    ] = None,
    split: Annotated[
        Optional[Split],
        typer.Option(
            "--split",
            case_sensitive=False,
            help="Prove every theorem of this split instead of a single one."
        )
    ] = None,
    policy: Annotated[
        PolicyKind,
        typer.Option("--policy", "-p", case_sensitive=False, help="Policy ranking the tactic applications.")
    ] = PolicyKind.baseline_tfidf,
    checkpoint: Annotated[
        Optional[Path],
        typer.Option("--checkpoint", "-c", help="Checkpoint of the learned policy.")
    ] = None,
    seed: Annotated[
        Optional[int],
        typer.Option("--seed", help="Sample the search options from this seed instead of using the defaults.")
    ] = None,
    node_budget: BudgetOption = None,
    total_timeout: TimeoutOption = None,
    tactic_timeout: TacticTimeoutOption = None,
    workers: WorkersOption = 1,
    unlock_test: UnlockTestOption = False,
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    if (theorem is None) == (split is None):
        raise typer.BadParameter("give either a theorem name or --split")

    registry = _open_registry(workdir)
    human_logs = _human_logs(workdir)
    options = _options(node_budget, total_timeout, tactic_timeout)
    if seed is not None:
        options = sample_options(seed, options)
    log_dir = make_workdir_dir("logs", workdir) / "prove"

    if split is not None:
        report = run_bench(
            registry, human_logs, split, policy, options, checkpoint, log_dir, workers, unlock_test, settings
        )
        console.print(_bench_table([report]))
        _write_metrics(metrics_out, [report])
        return

    target = theorem_target(registry, theorem)
    check_unlocked(split_of(int(target.fingerprint)), unlock_test)
    generator = make_policy(policy, registry, human_logs, checkpoint, settings)
    if isinstance(generator, LearnedPolicy):
        generator.precompute(registry.fingerprints())
    result: AttemptResult = prove_target(registry, target, generator, options, log_dir, settings)
    console.print(f"{result.target}: {result.outcome.value} ({result.nodes} nodes)")
    _write_metrics(metrics_out, [result])


@tacticforge.command("loop")
@reports_errors
def run_rl_loop(
    config_path: Annotated[
        Path,
        typer.Option("--config", "-c", case_sensitive=False, help="Loop configuration file of key=value lines.")
    ],
    rounds: Annotated[
        Optional[int],
        typer.Option("--rounds", "-r", help="Number of rounds, overriding the configuration.")
    ] = None,
    seed: Annotated[
        Optional[int],
        typer.Option("--seed", help="Seed of all loop randomness, overriding the configuration.")
    ] = None,
    inherited_path: Annotated[
        Optional[Path],
        typer.Option("--inherit", help="Training examples inherited from an earlier loop.")
    ] = None,
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    overrides = {key: value for key, value in dict(rounds=rounds, seed=seed).items() if value is not None}
    config = read_loop_config(config_path, **overrides)
    inherited = read_examples(inherited_path) if inherited_path is not None else []
    state = LoopState(_open_registry(workdir), _human_logs(workdir), config, workdir, settings, inherited)
    reports = run_loop(state)

    table = Table(title="Loop rounds")
    for column in ("Round", "Policy", "Proved", "Cumulative", "Examples", "Mean loss"):
        table.add_column(column)
    for report in reports:
        table.add_row(
            str(report.round),
            report.policy,
            f"{len(report.proved)}/{len(report.sampled)}",
            str(len(report.cumulative_proved)),
            str(report.examples),
            "-" if report.mean_loss is None else f"{report.mean_loss:.4f}",
        )
    console.print(table)
    _write_metrics(metrics_out, read_jsonl(state.metrics_path, RoundMetrics)[-len(reports):] if reports else [])


@tacticforge.command("split")
@reports_errors
def split_theorems(
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    registry = _open_registry(workdir)
    assignment = assign_splits(entry.fingerprint for entry in registry)
    save_model_to_json("splits", assignment, make_workdir_dir("theory", workdir))
    _write_metrics(metrics_out, [SplitMetrics(counts=assignment.counts())])


@tacticforge.command("extract")
@reports_errors
def extract_training_examples(
    logs_dir: Annotated[
        Optional[Path],
        typer.Option("--logs", "-l", help="Directory searched recursively for proof logs. Defaults to the workdir logs.")
    ] = None,
    unlock_test: UnlockTestOption = False,
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    registry = _open_registry(workdir)
    logs = read_proof_logs(logs_dir or make_workdir_dir("logs", workdir), recursive=True)
    splits = assign_splits(entry.fingerprint for entry in registry)
    examples = extract_examples(logs, splits)

    counts = {}
    for split in Split:
        if split == Split.test and not unlock_test:
            continue
        members = [ex for ex in examples if ex.split == split]
        counts[split.value] = write_examples(make_workdir_path("examples", split.value.lower(), workdir=workdir), members)
    _write_metrics(metrics_out, [ExtractMetrics(logs=len(logs), examples=counts)])


@tacticforge.command("prune")
@reports_errors
def prune_proof_logs(
    logs_dir: Annotated[
        Optional[Path],
        typer.Option("--logs", "-l", help="Directory of proof logs to prune. Defaults to the human proofs.")
    ] = None,
    output_dir: Annotated[
        Optional[Path],
        typer.Option("--output-dir", "-o", help="Directory for the pruned logs.")
    ] = None,
    tactic_timeout: TacticTimeoutOption = None,
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    registry = _open_registry(workdir)
    logs = read_proof_logs(logs_dir or make_workdir_dir("logs", workdir) / HUMAN_LOGS)
    output_dir = output_dir or make_workdir_dir("logs", workdir) / "pruned"

    before = after = 0
    with LocalProofAssistant(registry, settings) as assistant:
        for log in logs:
            pruned = prune_log(log, assistant, tactic_timeout or settings.tactic_timeout_s)
            pruned.write(proof_log_path(output_dir, log.name))
            before += sum(len(step.args) for step in log.steps)
            after += sum(len(step.args) for step in pruned.steps)
    logger.info(f"Pruned {len(logs)} proofs from {before} to {after} arguments")
    _write_metrics(metrics_out, [PruneMetrics(logs=len(logs), arguments_before=before, arguments_after=after)])


@tacticforge.command("check")
@reports_errors
def check_proofs(
    logs_dir: Annotated[
        Optional[Path],
        typer.Option("--logs", "-l", help="Directory searched recursively for proof logs. Defaults to the workdir logs.")
    ] = None,
    any_theorem: Annotated[
        bool,
        typer.Option("--any-theorem", help="Let proofs cite any registered theorem, not only earlier ones.")
    ] = False,
    allow_imported: Annotated[
        bool,
        typer.Option("--allow-imported", help="Accept proofs citing theorems registered by trusted import.")
    ] = False,
    workers: WorkersOption = 1,
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    registry = _open_registry(workdir)
    report = check_corpus(
        logs_dir or make_workdir_dir("logs", workdir), registry, not any_theorem, workers, settings, allow_imported
    )
    _write_metrics(metrics_out, [CheckMetrics(checked=report.checked, failed=len(report.failed))])
    console.print(f"{report.checked} proofs checked, {len(report.failed)} failed")
    if not report.ok:
        first = report.failed[0]
        typer.echo(
            f"error: {first.error}: {len(report.failed)} proofs failed, first {first.file}: {first.reason}",
            err=True,
        )
        raise typer.Exit(1)


@tacticforge.command("stats")
@reports_errors
def show_corpus_stats(
    logs_dir: Annotated[
        Optional[Path],
        typer.Option("--logs", "-l", help="Directory of proof logs. Defaults to the human proofs.")
    ] = None,
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    registry = _open_registry(workdir)
    stats = corpus_stats(registry, read_proof_logs(logs_dir or make_workdir_dir("logs", workdir) / HUMAN_LOGS))

    table = Table(title="Corpus")
    table.add_column("Definitions", justify="right")
    table.add_column("Theorems", justify="right")
    table.add_column("Proof states", justify="right")
    table.add_column("Tokens (mean)", justify="right")
    table.add_column("Tokens (median)", justify="right")
    table.add_column("Distinct tokens", justify="right")
    table.add_row(
        str(stats.definitions),
        str(stats.theorems),
        str(stats.proof_states),
        f"{stats.token_mean:.1f}",
        f"{stats.token_median:.1f}",
        str(stats.distinct_tokens),
    )
    console.print(table)
    console.print_json(stats.model_dump_json())
    _write_metrics(metrics_out, [stats])


@tacticforge.command("bench")
@reports_errors
def benchmark_policy(
    split: Annotated[
        Split,
        typer.Option("--split", case_sensitive=False, help="Split to prove.")
    ] = Split.valid,
    policy: Annotated[
        PolicyKind,
        typer.Option("--policy", "-p", case_sensitive=False, help="Policy to benchmark.")
    ] = PolicyKind.baseline_meson,
    checkpoint: Annotated[
        Optional[Path],
        typer.Option("--checkpoint", "-c", help="Checkpoint of the learned policy.")
    ] = None,
    node_budget: BudgetOption = None,
    total_timeout: TimeoutOption = None,
    tactic_timeout: TacticTimeoutOption = None,
    workers: WorkersOption = 1,
    unlock_test: UnlockTestOption = False,
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    check_unlocked(split, unlock_test)
    registry = _open_registry(workdir)
    human_logs = _human_logs(workdir)
    options = _options(node_budget, total_timeout, tactic_timeout)

    splits = [split]
    if unlock_test and split != Split.test:
        splits.append(Split.test)
    reports = [
        run_bench(
            registry,
            human_logs,
            s,
            policy,
            options,
            checkpoint,
            make_workdir_dir("logs", workdir) / "bench" / policy.value / s.value.lower(),
            workers,
            unlock_test,
            settings,
        )
        for s in splits
    ]
    console.print(_bench_table(reports))
    _write_metrics(metrics_out, reports)


@tacticforge.command("train")
@reports_errors
def train_policy(
    supervised: Annotated[
        bool,
        typer.Option(
            "--supervised/--with-loop",
            help="Train on the human proofs only, or add the proofs found by the loop."
        )
    ] = True,
    steps: Annotated[
        int,
        typer.Option("--steps", help="Number of training steps.")
    ] = 200,
    batch_size: Annotated[
        int,
        typer.Option("--batch-size", help="Examples per training step.")
    ] = 32,
    variant: Annotated[
        PolicyVariant,
        typer.Option("--variant", case_sensitive=False, help="Whether argument scores depend on the tactic.")
    ] = PolicyVariant.tactic_dependent,
    adam: Annotated[
        bool,
        typer.Option("--adam", help="Use Adam instead of plain gradient descent.")
    ] = False,
    dropout: Annotated[
        bool,
        typer.Option("--dropout", help="Apply dropout to the tower inputs.")
    ] = False,
    seed: Annotated[
        int,
        typer.Option("--seed", help="Seed of initialisation, batching and negative sampling.")
    ] = 0,
    workdir: WorkdirOption = settings.workdir,
    metrics_out: MetricsOption = None,
):

    registry = _open_registry(workdir)
    logs = _human_logs(workdir)
    if not supervised:
        logs += [
            log for round_dir in sorted(make_workdir_dir("logs", workdir).glob("round_*"))
            for log in read_proof_logs(round_dir)
        ]
    splits = assign_splits(entry.fingerprint for entry in registry)
    examples = extract_examples(logs, splits)
    train = [ex for ex in examples if ex.split == Split.train]
    validation = [ex for ex in examples if ex.split == Split.valid]
    if not train:
        raise AllPoolsEmpty("no TRAIN examples to learn from")

    tactics = [t.value for t in registered_tactics(settings)]
    model = PolicyModel.create(tactics, variant, settings, seed)
    trainer = Trainer(model, settings, adam=adam, dropout=dropout, seed=seed)
    premises = PremiseIndex(registry, model.buckets)
    done, mean_loss = trainer.fit(train, premises, registry.env, steps, batch_size, np.random.default_rng(seed))

    label = "supervised" if supervised else "supervised_with_loop"
    checkpoint = save_checkpoint(
        model, make_workdir_path("checkpoints", label, ".ckpt", workdir), averaged=trainer.average
    )
    averaged = trainer.averaged_model()
    LearnedPolicy(averaged, registry).precompute(registry.fingerprints())
    save_premise_cache(averaged, premise_cache_path(checkpoint))
    validation_metrics = proxy_metrics(averaged, validation, premises, registry.env, seed)
    console.print(
        f"VALID tactic accuracy {validation_metrics.tactic_accuracy:.3f}, "
        f"ranking error {validation_metrics.ranking_error:.3f} over {validation_metrics.examples} examples"
    )
    _write_metrics(metrics_out, [TrainMetrics(
        steps=done,
        mean_loss=mean_loss,
        train_examples=len(train),
        checkpoint=str(checkpoint),
        validation=validation_metrics,
    )])


if __name__ == "__main__":
    tacticforge()
