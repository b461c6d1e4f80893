"""
Proof logs: one proof tree per file, as newline-delimited JSON.

Step records list the successful tactic applications of the proof in
preorder: each step's subgoals are proved by the steps that follow it, first
subgoal first. A summary record closes the file.
"""
import json
import logging

from enum import Enum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ValidationError

from tacticforge.errors import NotFound, ProtocolError
from tacticforge.records import dict_to_model, model_to_line
from tacticforge.service.protocol import GoalPayload
from tacticforge.tactics.goal import Goal


logger = logging.getLogger(__name__)


class ProofSource(str, Enum):
    human = "HUMAN"
    loop = "LOOP"


class SearchOutcome(str, Enum):
    proved = "PROVED"
    failed = "FAILED"
    budget_exhausted = "BUDGET_EXHAUSTED"
    timeout = "TIMEOUT"


class ProofStepRecord(BaseModel):
    kind: Literal["step"] = "step"
    index: int
    goal: GoalPayload
    tactic: str
    args: list[str] = []
    negative_args: list[str] = []
    status: str = "SUCCESS"
    subgoals: list[GoalPayload] = []


class ProofSummaryRecord(BaseModel):
    kind: Literal["summary"] = "summary"
    theorem: str | None = None
    fingerprint: str
    source: ProofSource = ProofSource.human
    round: int | None = None
    outcome: SearchOutcome = SearchOutcome.proved
    nodes: int = 0
    edges: int = 0
    closed: int = 0
    failed: int = 0
    ignored: int = 0
    elapsed_ms: int = 0


class ProofLog(BaseModel):
    steps: list[ProofStepRecord]
    summary: ProofSummaryRecord

    @property
    def name(self) -> str:
        return self.summary.theorem or self.summary.fingerprint

    @property
    def root(self) -> GoalPayload:
        return self.steps[0].goal

    def root_goal(self, env) -> Goal:
        return self.root.to_goal(env)

    def write(self, path: Path) -> Path:
        path.parent.mkdir(exist_ok=True, parents=True)
        with open(path, "w", encoding="utf-8") as f:
            for step in self.steps:
                f.write(model_to_line(step) + "\n")
            f.write(model_to_line(self.summary) + "\n")
        logger.debug(f"Wrote proof log of {self.name} to {path}")
        return path

    @classmethod
    def read(cls, path: Path) -> "ProofLog":
        """
        Raises:
            NotFound: the file does not exist
            ProtocolError: the file is not a proof log
        """

        if not path.exists():
            raise NotFound(f"no proof log at {path}")
        steps = []
        summary = None
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    if record.get("kind") == "summary":
                        summary = dict_to_model(record, ProofSummaryRecord)
                    else:
                        steps.append(dict_to_model(record, ProofStepRecord))
                except (json.JSONDecodeError, AttributeError, ValidationError) as e:
                    raise ProtocolError(f"{path}:{lineno}: not a proof log record: {e}") from e
        if summary is None or not steps:
            raise ProtocolError(f"{path}: proof log without steps or summary")
        return cls(steps=steps, summary=summary)


def proof_log_path(directory: Path, label: str) -> Path:
    return directory / f"{label}.proof.jsonl"


def read_proof_logs(directory: Path, recursive: bool = False) -> list[ProofLog]:
    """All readable proof logs in a directory, in path order."""

    pattern = "**/*.proof.jsonl" if recursive else "*.proof.jsonl"
    logs = []
    for path in sorted(Path(directory).glob(pattern)):
        try:
            logs.append(ProofLog.read(path))
        except ProtocolError as e:
            logger.warning(f"Skipping {path}: {e}")
    return logs
