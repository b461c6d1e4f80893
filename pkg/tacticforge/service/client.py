"""
Clients of the proof assistant service.

Search, pruning and the loop talk to a `ProofAssistant`; the local
implementation calls the service in-process, the socket implementation
speaks the wire protocol to a running server.
"""
import logging
import socket
import threading

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Sequence

from tacticforge.errors import FingerprintMismatch, ProtocolError
from tacticforge.kernel.theorem import Theorem
from tacticforge.service.protocol import (
    ApplyResponse,
    ApplyTacticRequest,
    ErrorResponse,
    GoalPayload,
    RegisterResponse,
    RegisterTheoremRequest,
    decode_response,
    encode_message,
)
from tacticforge.service.registry import TheoremRegistry
from tacticforge.service.server import ApplyOutcome, ProofAssistantService
from tacticforge.settings import Settings
from tacticforge.sexpr.codec import print_term
from tacticforge.sexpr.fingerprint import fingerprint
from tacticforge.tactics.goal import Goal


logger = logging.getLogger(__name__)


class ProofAssistant(ABC):
    """The two calls of the proof assistant API, plus the environment goals are typed in."""

    @property
    @abstractmethod
    def env(self):
        ...

    @abstractmethod
    def apply_tactic(
            self, goal: Goal, tactic: str, args: Sequence[int] = (), timeout_s: float | None = None
    ) -> ApplyOutcome:
        ...

    @abstractmethod
    def register_theorem(self, theorem: Theorem, name: str | None = None) -> int:
        ...

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _request(goal: Goal, tactic: str, args: Sequence[int], timeout_s: float | None) -> ApplyTacticRequest:
    return ApplyTacticRequest(
        goal=GoalPayload.from_goal(goal),
        tactic=str(tactic),
        args=[str(fp) for fp in args],
        timeout_ms=max(1, int(timeout_s * 1000)) if timeout_s else None,
    )


def _outcome(response: ApplyResponse | RegisterResponse | ErrorResponse, env) -> ApplyOutcome:
    if isinstance(response, ErrorResponse):
        raise ProtocolError(f"{response.error}: {response.message}")
    if not isinstance(response, ApplyResponse):
        raise ProtocolError(f"expected apply_response, got {response.kind}")
    return ApplyOutcome(
        status=response.status,
        subgoals=tuple(payload.to_goal(env) for payload in response.subgoals),
        elapsed_ms=response.elapsed_ms,
        error_text=response.error_text,
    )


class LocalProofAssistant(ProofAssistant):

    def __init__(self, registry: TheoremRegistry, settings: Settings | None = None):
        self.service = ProofAssistantService(registry, settings)

    @property
    def env(self):
        return self.service.registry.env

    @property
    def registry(self) -> TheoremRegistry:
        return self.service.registry

    def apply_tactic(self, goal, tactic, args=(), timeout_s=None):
        return self.service.apply_goal(goal, tactic, list(args), timeout_s)

    def register_theorem(self, theorem, name=None):
        return self.service.registry.register(theorem, name=name)


class SocketProofAssistant(ProofAssistant):
    """
    Client for a server started with `tacticforge serve --socket PATH`.

    The environment is supplied by the caller and must match the server's,
    since subgoals come back as S-expressions typed against it.
    """

    def __init__(self, socket_path: Path, env):
        self._env = env
        self._sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        self._sock.connect(str(socket_path))
        self._reader = self._sock.makefile("rb")
        self._lock = threading.Lock()
        logger.info(f"Connected to {socket_path}")

    @property
    def env(self):
        return self._env

    def _call(self, request) -> ApplyResponse | RegisterResponse | ErrorResponse:
        with self._lock:
            self._sock.sendall(encode_message(request).encode("utf-8"))
            line = self._reader.readline()
        if not line:
            raise ProtocolError("connection closed by server")
        return decode_response(line)

    def apply_tactic(self, goal, tactic, args=(), timeout_s=None):
        return _outcome(self._call(_request(goal, tactic, args, timeout_s)), self._env)

    def register_theorem(self, theorem, name=None):
        request = RegisterTheoremRequest(
            hyps=[print_term(h) for h in theorem.hyps],
            conclusion=print_term(theorem.conclusion),
            fingerprint=str(fingerprint(theorem)),
            name=name,
        )
        response = self._call(request)
        if isinstance(response, ErrorResponse):
            if response.error == "FingerprintMismatch":
                raise FingerprintMismatch(response.message)
            raise ProtocolError(f"{response.error}: {response.message}")
        return int(response.fingerprint)

    def close(self):
        self._reader.close()
        self._sock.close()
