"""
Replaying theory files into a registry.

Scripts are replayed the way a human would step through them: each step
applies one tactic to the first open goal and puts its subgoals in front of
the remaining ones. The justifications are composed once every goal is
closed, so each theorem is sealed by the kernel before it is registered.
"""
import logging
import time

from pathlib import Path
from typing import Sequence

from pydantic import BaseModel

from tacticforge.errors import (
    ForwardReference,
    KernelError,
    ScriptFailure,
    SExprError,
    TheoryFormatError,
)
from tacticforge.data.theory_parsing import Declaration, DeclarationKind, TheoryFile, read_theory
from tacticforge.kernel.theorem import Theorem
from tacticforge.search.proof_log import (
    ProofLog,
    ProofSource,
    ProofStepRecord,
    ProofSummaryRecord,
    SearchOutcome,
    proof_log_path,
)
from tacticforge.service.protocol import GoalPayload
from tacticforge.service.registry import TheoremRegistry
from tacticforge.settings import Settings, get_settings
from tacticforge.sexpr.codec import parse_term, parse_type
from tacticforge.tactics.goal import Goal, TacticResult
from tacticforge.tactics.library import apply_tactic


logger = logging.getLogger(__name__)


DEFINITION_SUFFIX = "_DEF"


class LoadedTheory(BaseModel):
    """Names and fingerprints added by one load, in declaration order."""

    source: str
    types: list[str] = []
    constants: list[str] = []
    definitions: dict[str, str] = {}
    axioms: dict[str, str] = {}
    theorems: dict[str, str] = {}
    logs: list[ProofLog] = []
    elapsed_ms: int = 0

    def write_logs(self, directory: Path) -> list[Path]:
        return [log.write(proof_log_path(directory, log.name)) for log in self.logs]


class _Replayed:

    def __init__(self, goal: Goal, tactic: str, args: list[int], result: TacticResult):
        self.goal = goal
        self.tactic = tactic
        self.args = args
        self.result = result


def definition_name(constant: str) -> str:
    return f"{constant}{DEFINITION_SUFFIX}"


def _resolve(
        name: str,
        step_index: int,
        registry: TheoremRegistry,
        theorem_name: str,
        later: set[str],
) -> tuple[int, Theorem]:
    if registry.has_name(name):
        fp = registry.fingerprint_of(name)
        return fp, registry.get(fp)
    if name in later or name == theorem_name:
        raise ForwardReference(f"{theorem_name} step {step_index} uses {name} before it is proven")
    raise ScriptFailure(theorem_name, step_index, f"unknown theorem {name}")


def _compose(name: str, replayed: list[_Replayed]) -> Theorem:
    position = 0

    def build() -> Theorem:
        nonlocal position
        index = position
        step = replayed[index]
        position += 1
        children = [build() for _ in step.result.subgoals]
        try:
            return step.result.justification(children)
        except KernelError as e:
            raise ScriptFailure(name, index, f"justification failed: {e}") from e

    return build()


def replay_script(
        declaration: Declaration,
        goal: Goal,
        registry: TheoremRegistry,
        later: set[str] = frozenset(),
        settings: Settings | None = None,
) -> tuple[Theorem, list[_Replayed]]:
    """
    Run a proof script against a goal and return the sealed theorem with the
    successful applications in proof order.

    Raises:
        ScriptFailure: a step did not apply, goals were left open or steps were left over
        ForwardReference: a step names a theorem that is only proven later
    """

    settings = settings or get_settings()
    name = declaration.name
    stack = [goal]
    replayed = []
    for index, step in enumerate(declaration.script):
        if not stack:
            raise ScriptFailure(name, index, "no goals left")
        current = stack.pop(0)
        resolved = [_resolve(arg, index, registry, name, later) for arg in step.args]
        result = apply_tactic(
            current, step.tactic, [th for _, th in resolved], settings.tactic_timeout_s, settings
        )
        if not result.succeeded:
            raise ScriptFailure(name, index, f"{step} {result.outcome.value.lower()}: {result.reason}")
        replayed.append(_Replayed(current, step.tactic, [fp for fp, _ in resolved], result))
        stack = list(result.subgoals) + stack

    if stack:
        raise ScriptFailure(name, len(declaration.script), f"{len(stack)} goals left open")
    return _compose(name, replayed), replayed


def human_proof_log(name: str, fp: int, replayed: Sequence[_Replayed], elapsed_ms: int = 0) -> ProofLog:
    steps = [
        ProofStepRecord(
            index=i,
            goal=GoalPayload.from_goal(r.goal),
            tactic=r.tactic,
            args=[str(a) for a in r.args],
            subgoals=[GoalPayload.from_goal(s) for s in r.result.subgoals],
        )
        for i, r in enumerate(replayed)
    ]
    goals = 1 + sum(len(r.result.subgoals) for r in replayed)
    summary = ProofSummaryRecord(
        theorem=name,
        fingerprint=str(fp),
        source=ProofSource.human,
        outcome=SearchOutcome.proved,
        nodes=goals,
        edges=len(replayed),
        closed=goals,
        elapsed_ms=elapsed_ms,
    )
    return ProofLog(steps=steps, summary=summary)


def _context(theory: TheoryFile, declaration: Declaration) -> str:
    return f"{theory.source}:{declaration.line}: {declaration.kind.value} {declaration.name}"


def load_theory(
        theory: TheoryFile | Path,
        registry: TheoremRegistry | None = None,
        settings: Settings | None = None,
) -> tuple[TheoremRegistry, LoadedTheory]:
    """
    Declare types and constants, assert axioms, make definitions and replay
    every theorem's proof script, in file order. Axioms, definitions and
    proven theorems are registered by name so later scripts can cite them;
    a definition of constant `c` is cited as `c_DEF`.

    Args:
        theory: parsed theory file, or the path of one
        registry: registry to extend, a fresh one by default
        settings: tactic limits for replay

    Returns:
        the registry and what the load added to it, with one human proof log per theorem

    Raises:
        TheoryFormatError: a statement does not parse or a declaration is rejected by the kernel
        ScriptFailure: a proof script does not replay
        ForwardReference: a script cites a theorem proven later in the file
    """

    if not isinstance(theory, TheoryFile):
        theory = read_theory(theory)
    registry = registry if registry is not None else TheoremRegistry()
    settings = settings or get_settings()
    env = registry.env
    loaded = LoadedTheory(source=theory.source)
    start = time.monotonic()

    pending = {d.name for d in theory.theorems()}
    for declaration in theory.declarations:
        name = declaration.name
        try:
            if declaration.kind == DeclarationKind.type:
                env.new_type(name, declaration.arity)
                loaded.types.append(name)
            elif declaration.kind == DeclarationKind.const:
                env.new_constant(name, parse_type(declaration.text, env))
                loaded.constants.append(name)
            elif declaration.kind == DeclarationKind.definition:
                _, th = env.define(name, parse_term(declaration.text, env))
                label = definition_name(name)
                loaded.definitions[label] = str(registry.register(th, name=label))
            elif declaration.kind == DeclarationKind.axiom:
                th = env.new_axiom(name, parse_term(declaration.text, env))
                loaded.axioms[name] = str(registry.register(th, name=name))
            else:
                statement = parse_term(declaration.text, env)
        except (SExprError, KernelError) as e:
            raise TheoryFormatError(f"{_context(theory, declaration)}: {e}") from e

        if declaration.kind != DeclarationKind.theorem:
            continue
        pending.discard(name)
        began = time.monotonic()
        try:
            goal = Goal([], statement)
        except KernelError as e:
            raise TheoryFormatError(f"{_context(theory, declaration)}: {e}") from e
        theorem, replayed = replay_script(declaration, goal, registry, pending, settings)
        fp = registry.register(theorem, name=name)
        loaded.theorems[name] = str(fp)
        loaded.logs.append(human_proof_log(name, fp, replayed, int((time.monotonic() - began) * 1000)))
        logger.debug(f"Proved {name} in {len(replayed)} steps")

    loaded.elapsed_ms = int((time.monotonic() - start) * 1000)
    logger.info(
        f"Loaded {theory.source}: {len(loaded.types)} types, {len(loaded.constants)} constants, "
        f"{len(loaded.definitions)} definitions, {len(loaded.axioms)} axioms, "
        f"{len(loaded.theorems)} theorems in {loaded.elapsed_ms} ms"
    )
    return registry, loaded
