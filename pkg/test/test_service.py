import io
import json
import threading
import time

import pytest

from tacticforge.data.seed import seed_theory
from tacticforge.data.theory_loading import load_theory
from tacticforge.errors import CorruptSnapshot, FingerprintMismatch, ProtocolError
from tacticforge.kernel.syntax import mk_conj
from tacticforge.kernel.terms import Var, mk_eq
from tacticforge.kernel.theorem import Provenance, REFL
from tacticforge.kernel.types import BOOL
from tacticforge.service.client import LocalProofAssistant, SocketProofAssistant
from tacticforge.service.protocol import (
    ApplyResponse,
    ApplyStatus,
    ApplyTacticRequest,
    ErrorResponse,
    GoalPayload,
    RegisterResponse,
    RegisterTheoremRequest,
    decode_request,
    decode_response,
    encode_message,
)
from tacticforge.service.registry import TheoremRegistry
from tacticforge.service.server import ProofAssistantServer, ProofAssistantService
from tacticforge.service.snapshot import load_snapshot, save_snapshot
from tacticforge.sexpr.codec import print_term
from tacticforge.sexpr.fingerprint import fingerprint
from tacticforge.tactics.goal import Goal


p = Var("p", BOOL)
q = Var("q", BOOL)


@pytest.fixture
def service():
    return ProofAssistantService(TheoremRegistry())


def _apply_line(goal, tactic, args=(), **kwargs):
    request = ApplyTacticRequest(
        goal=GoalPayload.from_goal(goal), tactic=tactic, args=[str(a) for a in args], **kwargs
    )
    return encode_message(request)


def test_apply_tactic_returns_subgoals(service):
    reply = decode_response(service.handle_line(_apply_line(Goal([p, q], mk_conj(p, q)), "CONJ_TAC", id="r1")))
    assert isinstance(reply, ApplyResponse)
    assert reply.id == "r1"
    assert reply.status == ApplyStatus.success
    assert [s.conclusion for s in reply.subgoals] == [print_term(p), print_term(q)]


def test_apply_does_not_change_registry(service):
    service.handle_line(_apply_line(Goal([], mk_eq(p, p)), "REFL_TAC"))
    assert len(service.registry) == 0


def test_apply_with_unknown_fingerprint(service):
    reply = decode_response(service.handle_line(_apply_line(Goal([], p), "ACCEPT_TAC", [12345])))
    assert reply.status == ApplyStatus.unknown_fingerprint


def test_apply_failure_reports_reason(service):
    reply = decode_response(service.handle_line(_apply_line(Goal([], p), "CONJ_TAC")))
    assert reply.status == ApplyStatus.failure
    assert reply.error_text


def test_malformed_lines_get_error_responses(service):
    reply = decode_response(service.handle_line("{not json"))
    assert isinstance(reply, ErrorResponse)
    assert reply.error == "bad_json"
    assert reply.id is None

    reply = decode_response(service.handle_line(json.dumps({"kind": "apply_tactic", "id": "x7"})))
    assert reply.error == "bad_message"
    assert reply.id == "x7"


def test_bad_term_is_reported(service):
    line = json.dumps({"kind": "apply_tactic", "goal": {"conclusion": "(q x)"}, "tactic": "REFL_TAC"})
    reply = decode_response(service.handle_line(line))
    assert reply.error == "bad_term"


def _deep_term(depth):
    text = "(v bool p)"
    for _ in range(depth):
        text = f"(a {text} (v bool p))"
    return text


def test_deeply_nested_term_is_a_bad_term(service):
    deep = _deep_term(20_000)
    line = json.dumps({"kind": "apply_tactic", "id": "d", "goal": {"conclusion": deep}, "tactic": "REFL_TAC"})
    reply = decode_response(service.handle_line(line))
    assert reply.error == "bad_term"
    assert reply.id == "d"

    reply = decode_response(service.handle_line(encode_message(RegisterTheoremRequest(conclusion=deep))))
    assert reply.error == "bad_term"
    assert len(service.registry) == 0


def test_register_checks_client_fingerprint(service):
    th = REFL(p)
    good = RegisterTheoremRequest(conclusion=print_term(th.conclusion), fingerprint=str(fingerprint(th)))
    reply = decode_response(service.handle_line(encode_message(good)))
    assert isinstance(reply, RegisterResponse)
    assert int(reply.fingerprint) == fingerprint(th)
    assert reply.registry_size == 1

    again = decode_response(service.handle_line(encode_message(good)))
    assert again.registry_size == 1

    bad = RegisterTheoremRequest(conclusion=print_term(mk_eq(q, q)), fingerprint="1")
    reply = decode_response(service.handle_line(encode_message(bad)))
    assert reply.error == "FingerprintMismatch"
    assert len(service.registry) == 1


def test_registered_theorem_is_usable_as_argument(service):
    fp = service.registry.register(REFL(p), name="P_REFL")
    reply = decode_response(service.handle_line(_apply_line(Goal([], mk_eq(p, p)), "ACCEPT_TAC", [fp])))
    assert reply.status == ApplyStatus.success
    assert reply.subgoals == []


def test_registry_rejects_mismatched_fingerprint():
    registry = TheoremRegistry()
    with pytest.raises(FingerprintMismatch):
        registry.register(REFL(p), client_fingerprint=fingerprint(REFL(p)) ^ 1)


def test_decode_request_rejects_non_objects():
    with pytest.raises(ProtocolError):
        decode_request("[1, 2]")
    with pytest.raises(ProtocolError):
        decode_request(b"\xff\xfe")


def test_serve_stream_skips_blank_lines(service):
    lines = "\n" + _apply_line(Goal([], mk_eq(p, p)), "REFL_TAC", id="a") + "   \n" + "oops\n"
    out = io.StringIO()
    service.serve_stream(io.StringIO(lines), out)
    replies = [decode_response(line) for line in out.getvalue().splitlines()]
    assert [r.kind for r in replies] == ["apply_response", "error"]
    assert replies[0].id == "a"


def test_local_proof_assistant(seed_registry):
    assistant = LocalProofAssistant(seed_registry)
    fp = seed_registry.fingerprint_of("ADD_0")
    goal = Goal([], seed_registry.get(fp).conclusion)
    outcome = assistant.apply_tactic(goal, "ACCEPT_TAC", [fp])
    assert outcome.succeeded
    assert outcome.subgoals == ()


def test_snapshot_round_trip(seed_registry, tmp_path):
    path = save_snapshot(seed_registry, tmp_path / "registry.snapshot")
    loaded = load_snapshot(path)
    assert loaded.fingerprints() == seed_registry.fingerprints()
    assert loaded.names() == seed_registry.names()
    assert "num" in loaded.env.type_operators


def test_corrupt_snapshot_is_rejected(seed_registry, tmp_path):
    path = save_snapshot(seed_registry, tmp_path / "registry.snapshot")
    data = bytearray(path.read_bytes())
    data[-2] = ord("x") if data[-2] != ord("x") else ord("y")
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptSnapshot):
        load_snapshot(path)

    path.write_bytes(b"no header")
    with pytest.raises(CorruptSnapshot):
        load_snapshot(path)


def test_snapshot_restores_theory_and_provenance(seed_registry, tmp_path):
    loaded = load_snapshot(save_snapshot(seed_registry, tmp_path / "registry.snapshot"))
    assert [e.theorem.provenance for e in loaded] == [e.theorem.provenance for e in seed_registry]
    assert Provenance.imported not in {e.theorem.provenance for e in loaded}
    assert set(loaded.env.axioms) == set(seed_registry.env.axioms)
    assert set(loaded.env.definitions) == set(seed_registry.env.definitions)
    assert loaded.env.signature() == seed_registry.env.signature()


def test_imported_theorems_stay_imported_in_snapshots(service, tmp_path):
    request = RegisterTheoremRequest(conclusion=print_term(mk_eq(p, q)), name="P_EQ_Q")
    fp = int(decode_response(service.handle_line(encode_message(request))).fingerprint)
    assert service.registry.get(fp).provenance == Provenance.imported

    loaded = load_snapshot(save_snapshot(service.registry, tmp_path / "registry.snapshot"))
    assert loaded.get(fp).provenance == Provenance.imported


def test_socket_client_round_trip(tmp_path):
    socket_path = tmp_path / "pa.sock"
    service = ProofAssistantService(TheoremRegistry())
    server = ProofAssistantServer(socket_path, service)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        with SocketProofAssistant(socket_path, service.registry.env) as client:
            fp = client.register_theorem(REFL(p), name="P_REFL")
            assert fp == fingerprint(REFL(p))
            outcome = client.apply_tactic(Goal([p, q], mk_conj(p, q)), "CONJ_TAC")
            assert outcome.succeeded
            assert [g.conclusion for g in outcome.subgoals] == [p, q]
    finally:
        server.shutdown()
        server.server_close()
    assert service.registry.has_name("P_REFL")


def _outcome_key(outcome):
    return outcome.status, tuple(g.fingerprint for g in outcome.subgoals)


def test_concurrent_clients_match_isolated_calls(seed_registry, seed_logs, tmp_path, scaled):
    """Answers to interleaved requests from several connections equal those of a private assistant"""
    env = seed_registry.env
    requests = []
    for log in seed_logs:
        for step in log.steps:
            goal = step.goal.to_goal(env)
            requests.append((goal, step.tactic, [int(a) for a in step.args]))
            requests.append((goal, "CONJ_TAC", []))
    requests = requests[:scaled(160, 1_000)]

    local = LocalProofAssistant(seed_registry)
    expected = [_outcome_key(local.apply_tactic(g, t, a, timeout_s=10.0)) for g, t, a in requests]

    n_clients = 8
    socket_path = tmp_path / "pa.sock"
    server = ProofAssistantServer(socket_path, ProofAssistantService(seed_registry))
    threading.Thread(target=server.serve_forever, daemon=True).start()
    barrier = threading.Barrier(n_clients)
    answers = {}
    errors = []

    def client(k):
        try:
            with SocketProofAssistant(socket_path, env) as assistant:
                barrier.wait()
                for i in range(k, len(requests), n_clients):
                    goal, tactic, args = requests[i]
                    answers[i] = _outcome_key(assistant.apply_tactic(goal, tactic, args, timeout_s=10.0))
        except Exception as e:
            errors.append(e)

    threads = [threading.Thread(target=client, args=(k,)) for k in range(n_clients)]
    try:
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
    finally:
        server.shutdown()
        server.server_close()

    assert errors == []
    assert len(answers) == len(requests)
    compared = 0
    for i, key in enumerate(expected):
        if ApplyStatus.timeout in (key[0], answers[i][0]):
            continue
        assert answers[i] == key, requests[i][1]
        compared += 1
    assert compared > 0.9 * len(requests)
    assert any(status == ApplyStatus.failure for status, _ in expected)


def test_snapshot_loads_faster_than_replay(seed_registry, tmp_path, scaled):
    path = save_snapshot(seed_registry, tmp_path / "registry.snapshot")

    start = time.perf_counter()
    load_theory(seed_theory())
    replay_s = time.perf_counter() - start

    start = time.perf_counter()
    loaded = load_snapshot(path)
    load_s = time.perf_counter() - start

    assert loaded.fingerprints() == seed_registry.fingerprints()
    assert load_s < 2.0
    assert load_s * scaled(2, 10) <= replay_s
