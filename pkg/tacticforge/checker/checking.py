"""
Independent replay of proof logs.

The checker re-runs every recorded tactic application directly on the
tactic engine, compares the subgoals it gets with the recorded ones and
composes the justifications into a kernel theorem. Neither the search graph
nor the service is involved.
"""
import logging
import re
import time

from collections.abc import Collection
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from pydantic import BaseModel

from tacticforge.errors import (
    CheckFailure,
    ImportedArgument,
    KernelError,
    SExprError,
    TacticForgeError,
    UnknownFingerprint,
    UnresolvableArgument,
)
from tacticforge.kernel.theorem import Provenance, Theorem
from tacticforge.search.proof_log import ProofLog
from tacticforge.service.registry import TheoremRegistry
from tacticforge.settings import Settings, get_settings
from tacticforge.tactics.goal import Goal, TacticResult, proves
from tacticforge.tactics.library import apply_tactic


logger = logging.getLogger(__name__)


_FINGERPRINT = re.compile(r"[0-9]{1,20}")


def _goal(payload, env, step: int, what: str) -> Goal:
    try:
        return payload.to_goal(env)
    except (SExprError, KernelError) as e:
        raise CheckFailure(step, f"{what} does not parse: {e}") from e


def parse_fingerprint(text: str) -> int | None:
    """The fingerprint written as `text`, or None when it is not a decimal fingerprint."""

    if not _FINGERPRINT.fullmatch(text):
        return None
    return int(text)


def _arguments(
        log: ProofLog,
        step: int,
        registry: TheoremRegistry,
        available: Collection[int] | None,
        allow_imported: bool,
):
    theorems = []
    for text in log.steps[step].args:
        fp = parse_fingerprint(text)
        if fp is None:
            raise UnresolvableArgument(f"step {step}: {text!r} is not a fingerprint")
        if available is not None and fp not in available:
            raise UnresolvableArgument(f"step {step}: {fp} is not among the theorems available to {log.name}")
        try:
            theorem = registry.get(fp)
        except UnknownFingerprint as e:
            raise UnresolvableArgument(f"step {step}: {e}") from e
        if theorem.provenance == Provenance.imported:
            if not allow_imported:
                raise ImportedArgument(f"step {step}: {fp} was registered by trusted import")
            logger.warning(f"{log.name} step {step} cites the imported theorem {fp}")
        theorems.append(theorem)
    return theorems


def _compose(results: list[TacticResult]) -> Theorem:
    position = 0

    def build() -> Theorem:
        nonlocal position
        index = position
        result = results[index]
        position += 1
        children = [build() for _ in result.subgoals]
        try:
            return result.justification(children)
        except KernelError as e:
            raise CheckFailure(index, f"justification failed: {e}") from e

    return build()


def check_proof(
        log: ProofLog,
        registry: TheoremRegistry,
        available: Collection[int] | None = None,
        settings: Settings | None = None,
        allow_imported: bool = False,
) -> Theorem:
    """
    Replay a proof log and return the theorem it proves.

    Args:
        log: proof to check
        registry: source of the argument theorems and of the environment
        available: fingerprints the proof may cite, any registered theorem by default
        settings: tactic limits for the replay
        allow_imported: accept arguments sealed by trusted import instead of rejecting them

    Returns:
        a kernel-sealed theorem for the log's root goal

    Raises:
        CheckFailure: a step's goal, outcome or subgoals differ from the record, or the proof does not compose
        UnresolvableArgument: an argument is not a fingerprint or is not available
        ImportedArgument: an argument is a trusted import and `allow_imported` is off
    """

    settings = settings or get_settings()
    env = registry.env
    root = _goal(log.root, env, 0, "root goal")
    if str(root.fingerprint) != log.summary.fingerprint:
        raise CheckFailure(0, f"root goal has fingerprint {root.fingerprint}, log claims {log.summary.fingerprint}")

    stack = [root]
    results = []
    for index, step in enumerate(log.steps):
        if not stack:
            raise CheckFailure(index, "step after every goal was closed")
        goal = stack.pop(0)
        recorded = _goal(step.goal, env, index, "goal")
        if recorded != goal:
            raise CheckFailure(index, "recorded goal is not the next open goal")

        args = _arguments(log, index, registry, available, allow_imported)
        result = apply_tactic(goal, step.tactic, args, settings.tactic_timeout_s, settings)
        if not result.succeeded:
            raise CheckFailure(index, f"{step.tactic} {result.outcome.value.lower()}: {result.reason}")

        expected = [_goal(s, env, index, "subgoal").fingerprint for s in step.subgoals]
        actual = [s.fingerprint for s in result.subgoals]
        if expected != actual:
            raise CheckFailure(index, f"{step.tactic} produced {len(actual)} different subgoals on replay")
        results.append(result)
        stack = list(result.subgoals) + stack

    if stack:
        raise CheckFailure(len(log.steps), f"{len(stack)} goals left open")
    theorem = _compose(results)
    if not proves(theorem, root):
        raise CheckFailure(0, "composed theorem does not prove the root goal")
    return theorem


class FailedCheck(BaseModel):
    file: str
    step: int | None = None
    error: str
    reason: str


class CorpusCheckReport(BaseModel):
    checked: int = 0
    failed: list[FailedCheck] = []
    wall_ms: int = 0

    @property
    def ok(self) -> bool:
        return not self.failed


def _check_file(
        path: Path,
        root: Path,
        registry: TheoremRegistry,
        earlier_only: bool,
        allow_imported: bool,
        settings: Settings,
) -> FailedCheck | None:
    try:
        log = ProofLog.read(path)
        available = None
        fp = parse_fingerprint(log.summary.fingerprint)
        if fp is None:
            raise CheckFailure(0, f"summary fingerprint {log.summary.fingerprint!r} is not a fingerprint")
        if earlier_only and fp in registry:
            journal = registry.fingerprints()
            available = set(journal[:journal.index(fp)])
        check_proof(log, registry, available, settings, allow_imported)
    except CheckFailure as e:
        return FailedCheck(file=str(path.relative_to(root)), step=e.step, error=type(e).__name__, reason=e.reason)
    except TacticForgeError as e:
        return FailedCheck(file=str(path.relative_to(root)), error=type(e).__name__, reason=str(e))
    return None


def check_corpus(
        proof_log_dir: Path,
        registry: TheoremRegistry,
        earlier_only: bool = True,
        workers: int = 1,
        settings: Settings | None = None,
        allow_imported: bool = False,
) -> CorpusCheckReport:
    """
    Check every proof log under a directory, files in name order. With
    `earlier_only`, a proof of a registered theorem may only cite theorems
    registered before it. Proofs citing trusted imports fail unless
    `allow_imported` is set.
    """

    settings = settings or get_settings()
    start = time.monotonic()
    root = Path(proof_log_dir)
    paths = sorted(root.rglob("*.proof.jsonl"))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(
            lambda p: _check_file(p, root, registry, earlier_only, allow_imported, settings), paths
        ))

    failed = [outcome for outcome in outcomes if outcome is not None]
    for failure in failed:
        logger.warning(f"{failure.file}: {failure.error}: {failure.reason}")
    report = CorpusCheckReport(
        checked=len(paths) - len(failed),
        failed=failed,
        wall_ms=int((time.monotonic() - start) * 1000),
    )
    logger.info(f"Checked {report.checked} proofs, {len(report.failed)} failed")
    return report
