"""
Wire messages of the proof assistant service.

One UTF-8 JSON object per line. Terms travel as canonical S-expression
strings and fingerprints as decimal strings.
"""
import json
import logging

from enum import Enum
from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field, TypeAdapter, ValidationError

from tacticforge.errors import ProtocolError
from tacticforge.records import model_to_line
from tacticforge.sexpr.codec import parse_term, print_term
from tacticforge.tactics.goal import Goal


logger = logging.getLogger(__name__)


FingerprintText = Annotated[str, Field(pattern=r"^[0-9]{1,20}$")]


class ApplyStatus(str, Enum):
    success = "SUCCESS"
    failure = "FAILURE"
    timeout = "TIMEOUT"
    unknown_fingerprint = "UNKNOWN_FINGERPRINT"


class GoalPayload(BaseModel):
    hyps: list[str] = []
    conclusion: str

    @classmethod
    def from_goal(cls, goal: Goal) -> "GoalPayload":
        return cls(hyps=[print_term(h) for h in goal.hyps], conclusion=print_term(goal.conclusion))

    def to_goal(self, env) -> Goal:
        return Goal([parse_term(h, env) for h in self.hyps], parse_term(self.conclusion, env))


class ApplyTacticRequest(BaseModel):
    kind: Literal["apply_tactic"] = "apply_tactic"
    id: str | None = None
    goal: GoalPayload
    tactic: str
    args: list[FingerprintText] = []
    timeout_ms: int | None = Field(None, gt=0)


class RegisterTheoremRequest(BaseModel):
    kind: Literal["register_theorem"] = "register_theorem"
    id: str | None = None
    hyps: list[str] = []
    conclusion: str
    fingerprint: FingerprintText | None = None
    name: str | None = None


class ApplyResponse(BaseModel):
    kind: Literal["apply_response"] = "apply_response"
    id: str | None = None
    status: ApplyStatus
    subgoals: list[GoalPayload] = []
    elapsed_ms: int = 0
    error_text: str = ""


class RegisterResponse(BaseModel):
    kind: Literal["register_response"] = "register_response"
    id: str | None = None
    fingerprint: FingerprintText
    registry_size: int


class ErrorResponse(BaseModel):
    kind: Literal["error"] = "error"
    id: str | None = None
    error: str
    message: str = ""


Request = Annotated[Union[ApplyTacticRequest, RegisterTheoremRequest], Field(discriminator="kind")]
Response = Annotated[Union[ApplyResponse, RegisterResponse, ErrorResponse], Field(discriminator="kind")]

_requests = TypeAdapter(Request)
_responses = TypeAdapter(Response)


def encode_message(message: BaseModel) -> str:
    return model_to_line(message) + "\n"


def _decode(line: str | bytes, adapter: TypeAdapter):
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ProtocolError(f"bad_utf8: {e}") from e
    try:
        data = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"bad_json: {e}") from e
    if not isinstance(data, dict):
        raise ProtocolError("bad_message: expected a JSON object")
    try:
        return adapter.validate_python(data)
    except ValidationError as e:
        raise ProtocolError(f"bad_message: {e.error_count()} validation errors") from e


def decode_request(line: str | bytes) -> ApplyTacticRequest | RegisterTheoremRequest:
    """
    Raises:
        ProtocolError: the line is not JSON or not a valid request
    """

    return _decode(line, _requests)


def decode_response(line: str | bytes) -> ApplyResponse | RegisterResponse | ErrorResponse:
    return _decode(line, _responses)


def request_id(line: str | bytes) -> str | None:
    """Best-effort id of a line that failed to decode, so the error can be correlated."""

    try:
        data = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return None
    if isinstance(data, dict) and isinstance(data.get("id"), str):
        return data["id"]
    return None
