"""
Training examples mined from proof logs.

Every successful tactic application of a proof tree gives one example: the
goal, the tactic, the arguments it kept and the arguments pruning showed to
be unnecessary. Examples take the split of the theorem the proof belongs to.
"""
import logging

from enum import Enum
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel

from tacticforge.data.splits import Split, SplitAssignment
from tacticforge.records import read_jsonl, write_jsonl
from tacticforge.search.proof_log import ProofLog, ProofSource
from tacticforge.service.protocol import GoalPayload


logger = logging.getLogger(__name__)


class ExampleOrigin(str, Enum):
    human = "HUMAN"
    loop = "LOOP"


class TrainingExample(BaseModel):
    goal: GoalPayload
    tactic: str
    args: list[str] = []
    negative_args: list[str] = []
    split: Split
    origin: ExampleOrigin = ExampleOrigin.human
    round: int | None = None
    theorem: str


def examples_from_log(log: ProofLog, split: Split) -> list[TrainingExample]:
    origin = ExampleOrigin.loop if log.summary.source == ProofSource.loop else ExampleOrigin.human
    examples = []
    for step in log.steps:
        if step.status != "SUCCESS":
            continue
        kept = set(step.args)
        examples.append(TrainingExample(
            goal=step.goal,
            tactic=step.tactic,
            args=list(step.args),
            negative_args=[fp for fp in step.negative_args if fp not in kept],
            split=split,
            origin=origin,
            round=log.summary.round,
            theorem=log.summary.fingerprint,
        ))
    return examples


def extract_examples(logs: Iterable[ProofLog], splits: SplitAssignment) -> list[TrainingExample]:
    """Examples of every log, in log order."""

    examples = []
    for log in logs:
        examples.extend(examples_from_log(log, splits.split(int(log.summary.fingerprint))))
    logger.info(f"Extracted {len(examples)} training examples")
    return examples


def write_examples(path: Path, examples: Iterable[TrainingExample]) -> int:
    return write_jsonl(path, examples)


def read_examples(path: Path) -> list[TrainingExample]:
    return read_jsonl(path, TrainingExample)
