"""
The proof assistant service: stateless tactic application and stateful
theorem registration over newline-delimited JSON.
"""
import logging
import os
import socketserver
import sys
import time

from pathlib import Path
from typing import IO, Sequence

from pydantic import BaseModel, ConfigDict

from tacticforge.errors import (
    FingerprintMismatch,
    KernelError,
    ProtocolError,
    SExprError,
    UnknownFingerprint,
)
from tacticforge.service.protocol import (
    ApplyResponse,
    ApplyStatus,
    ApplyTacticRequest,
    ErrorResponse,
    GoalPayload,
    RegisterResponse,
    RegisterTheoremRequest,
    decode_request,
    encode_message,
    request_id,
)
from tacticforge.service.registry import TheoremRegistry
from tacticforge.service.snapshot import load_snapshot
from tacticforge.settings import Settings, get_settings
from tacticforge.sexpr.codec import parse_term
from tacticforge.tactics.goal import Goal, TacticOutcome
from tacticforge.tactics.library import apply_tactic


logger = logging.getLogger(__name__)


_STATUS = {
    TacticOutcome.success: ApplyStatus.success,
    TacticOutcome.failure: ApplyStatus.failure,
    TacticOutcome.timeout: ApplyStatus.timeout,
}


class ApplyOutcome(BaseModel):

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    status: ApplyStatus
    subgoals: tuple[Goal, ...] = ()
    elapsed_ms: int = 0
    error_text: str = ""

    @property
    def succeeded(self) -> bool:
        return self.status == ApplyStatus.success


class ProofAssistantService:
    """
    Request handling independent of the transport. `apply` never changes
    state; `register` appends to the registry.
    """

    def __init__(self, registry: TheoremRegistry, settings: Settings | None = None):
        self.registry = registry
        self.settings = settings or get_settings()

    def apply_goal(
            self, goal: Goal, tactic: str, args: Sequence[int], timeout_s: float | None = None
    ) -> ApplyOutcome:
        """Apply a tactic to an already decoded goal, resolving argument fingerprints."""

        start = time.monotonic()
        try:
            theorems = [self.registry.get(fp) for fp in args]
        except UnknownFingerprint as e:
            return ApplyOutcome(status=ApplyStatus.unknown_fingerprint, error_text=str(e))

        budget = timeout_s or self.settings.tactic_timeout_s
        result = apply_tactic(goal, tactic, theorems, budget=budget, settings=self.settings)
        elapsed_ms = int((time.monotonic() - start) * 1000)
        return ApplyOutcome(
            status=_STATUS[result.outcome],
            subgoals=result.subgoals,
            elapsed_ms=elapsed_ms,
            error_text=result.reason,
        )

    def apply(self, request: ApplyTacticRequest) -> ApplyResponse | ErrorResponse:
        try:
            goal = request.goal.to_goal(self.registry.env)
        except (SExprError, KernelError) as e:
            return ErrorResponse(id=request.id, error="bad_term", message=str(e))

        timeout_s = request.timeout_ms / 1000 if request.timeout_ms else None
        outcome = self.apply_goal(goal, request.tactic, [int(fp) for fp in request.args], timeout_s)
        return ApplyResponse(
            id=request.id,
            status=outcome.status,
            subgoals=[GoalPayload.from_goal(g) for g in outcome.subgoals],
            elapsed_ms=outcome.elapsed_ms,
            error_text=outcome.error_text,
        )

    def register(self, request: RegisterTheoremRequest) -> RegisterResponse | ErrorResponse:
        env = self.registry.env
        try:
            hyps = [parse_term(h, env) for h in request.hyps]
            theorem = env.trusted_import(hyps, parse_term(request.conclusion, env))
        except (SExprError, KernelError) as e:
            return ErrorResponse(id=request.id, error="bad_term", message=str(e))

        client_fp = int(request.fingerprint) if request.fingerprint is not None else None
        try:
            fp = self.registry.register(theorem, client_fingerprint=client_fp, name=request.name)
        except FingerprintMismatch as e:
            return ErrorResponse(id=request.id, error="FingerprintMismatch", message=str(e))
        return RegisterResponse(id=request.id, fingerprint=str(fp), registry_size=len(self.registry))

    def handle_line(self, line: str | bytes) -> str:
        """Answer one request line with one response line."""

        try:
            request = decode_request(line)
        except ProtocolError as e:
            error, _, message = str(e).partition(": ")
            logger.warning(f"Rejected message: {e}")
            return encode_message(ErrorResponse(id=request_id(line), error=error, message=message))

        try:
            if isinstance(request, ApplyTacticRequest):
                response = self.apply(request)
            else:
                response = self.register(request)
        except RecursionError:
            logger.warning(f"Rejected request {request.id}: term nested too deeply")
            response = ErrorResponse(id=request.id, error="bad_term", message="term nested too deeply")
        return encode_message(response)

    def serve_stream(self, instream: IO, outstream: IO) -> None:
        """Read requests until end of input, writing one response per non-blank line."""

        for line in instream:
            if not line.strip():
                continue
            reply = self.handle_line(line)
            if isinstance(line, bytes):
                outstream.write(reply.encode("utf-8"))
            else:
                outstream.write(reply)
            outstream.flush()


class _StreamHandler(socketserver.StreamRequestHandler):

    def handle(self):
        logger.info("Client connected")
        self.server.service.serve_stream(self.rfile, self.wfile)
        logger.info("Client disconnected")


class ProofAssistantServer(socketserver.ThreadingMixIn, socketserver.UnixStreamServer):
    daemon_threads = True

    def __init__(self, socket_path: Path, service: ProofAssistantService):
        self.service = service
        super().__init__(str(socket_path), _StreamHandler)


def open_registry(snapshot: Path | None, settings: Settings | None = None) -> TheoremRegistry:
    """
    The registry to serve: the snapshot named by TACTICFORGE_SNAPSHOT, else
    `snapshot`, else an empty one.
    """

    settings = settings or get_settings()
    path = settings.snapshot or snapshot
    if path is None or not Path(path).exists():
        logger.info("Starting with an empty registry")
        return TheoremRegistry()
    return load_snapshot(Path(path))


def serve(
        socket_path: Path | None = None,
        snapshot: Path | None = None,
        stdio: bool = False,
        settings: Settings | None = None,
) -> None:
    """
    Run the request loop until stdin closes (stdio mode) or the process is
    interrupted (socket mode).
    """

    settings = settings or get_settings()
    service = ProofAssistantService(open_registry(snapshot, settings), settings)

    if stdio or socket_path is None:
        logger.info("Serving on stdio")
        service.serve_stream(sys.stdin, sys.stdout)
        return

    if socket_path.exists():
        os.unlink(socket_path)
    with ProofAssistantServer(socket_path, service) as server:
        logger.info(f"Serving on {socket_path}")
        try:
            server.serve_forever()
        finally:
            os.unlink(socket_path)
