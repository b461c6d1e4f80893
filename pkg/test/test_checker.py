from pathlib import Path

import pytest

from tacticforge.checker.checking import check_corpus, check_proof
from tacticforge.errors import CheckFailure, ImportedArgument, UnresolvableArgument
from tacticforge.kernel.syntax import FALSE
from tacticforge.loop.benchmark import PolicyKind, make_policy, prove_target
from tacticforge.loop.rounds import LoopTarget
from tacticforge.search.options import ProverOptions
from tacticforge.search.proof_log import ProofLog, ProofStepRecord, ProofSummaryRecord, proof_log_path
from tacticforge.service.protocol import GoalPayload, RegisterTheoremRequest, decode_response, encode_message
from tacticforge.service.registry import TheoremRegistry
from tacticforge.service.server import ProofAssistantService
from tacticforge.sexpr.codec import print_term
from tacticforge.tactics.goal import Goal, proves


def _log(seed_logs, name):
    return next(log for log in seed_logs if log.summary.theorem == name)


def _self_citing_log(registry, name):
    fp = registry.fingerprint_of(name)
    goal = Goal([], registry.get(fp).conclusion)
    return ProofLog(
        steps=[ProofStepRecord(index=0, goal=GoalPayload.from_goal(goal), tactic="ACCEPT_TAC", args=[str(fp)])],
        summary=ProofSummaryRecord(theorem=name, fingerprint=str(fp)),
    )


def test_human_proofs_check(seed_registry, seed_logs):
    for log in seed_logs[:25]:
        theorem = check_proof(log, seed_registry)
        assert proves(theorem, log.root_goal(seed_registry.env))


def test_changed_tactic_fails_at_its_step(seed_registry, seed_logs):
    log = _log(seed_logs, "ADD_0_1").model_copy(deep=True)
    log.steps[0].tactic = "CONJ_TAC"
    with pytest.raises(CheckFailure) as e:
        check_proof(log, seed_registry)
    assert e.value.step == 0


def test_missing_steps_leave_goals_open(seed_registry, seed_logs):
    log = next(log for log in seed_logs if len(log.steps) > 1).model_copy(deep=True)
    log.steps = log.steps[:-1]
    with pytest.raises(CheckFailure) as e:
        check_proof(log, seed_registry)
    assert "open" in e.value.reason


def test_wrong_root_fingerprint(seed_registry, seed_logs):
    log = _log(seed_logs, "ADD_0_1").model_copy(deep=True)
    log.summary.fingerprint = str(int(log.summary.fingerprint) ^ 1)
    with pytest.raises(CheckFailure):
        check_proof(log, seed_registry)


def test_argument_must_be_available(seed_registry):
    log = _self_citing_log(seed_registry, "ADD_0")
    check_proof(log, seed_registry)
    with pytest.raises(UnresolvableArgument):
        check_proof(log, seed_registry, available=set())

    log.steps[0].args = ["12345"]
    with pytest.raises(UnresolvableArgument):
        check_proof(log, seed_registry)


def test_corrupted_argument_is_unresolvable(seed_registry):
    log = _self_citing_log(seed_registry, "ADD_0")
    for corrupted in ("12x4", "", " 12", "1_2", "-5"):
        log.steps[0].args = [corrupted]
        with pytest.raises(UnresolvableArgument, match="not a fingerprint"):
            check_proof(log, seed_registry)


def _false_by_import():
    registry = TheoremRegistry()
    service = ProofAssistantService(registry)
    request = RegisterTheoremRequest(conclusion=print_term(FALSE), name="BOGUS")
    fp = decode_response(service.handle_line(encode_message(request))).fingerprint
    goal = Goal([], FALSE)
    log = ProofLog(
        steps=[ProofStepRecord(index=0, goal=GoalPayload.from_goal(goal), tactic="ACCEPT_TAC", args=[fp])],
        summary=ProofSummaryRecord(theorem="FALSE", fingerprint=str(goal.fingerprint)),
    )
    return registry, log


def test_imported_arguments_are_rejected():
    registry, log = _false_by_import()
    with pytest.raises(ImportedArgument):
        check_proof(log, registry)

    theorem = check_proof(log, registry, allow_imported=True)
    assert theorem.conclusion == FALSE


def test_imported_arguments_in_corpus(workdir):
    registry, log = _false_by_import()
    log.write(proof_log_path(workdir, "FALSE"))

    report = check_corpus(workdir, registry, earlier_only=False)
    assert [f.error for f in report.failed] == ["ImportedArgument"]
    assert report.checked == 0
    assert check_corpus(workdir, registry, earlier_only=False, allow_imported=True).ok


def test_check_corpus(seed_registry, seed_logs, workdir):
    logs_dir = workdir / "logs"
    for log in seed_logs[:10]:
        log.write(proof_log_path(logs_dir / "human", log.name))
    report = check_corpus(logs_dir, seed_registry, workers=2)
    assert report.ok
    assert report.checked == 10

    _self_citing_log(seed_registry, "ADD_0").write(proof_log_path(logs_dir / "round_0000", "ADD_0"))
    (logs_dir / "broken.proof.jsonl").write_text("{}\n")
    report = check_corpus(logs_dir, seed_registry)
    assert not report.ok
    assert report.checked == 10
    assert sorted(f.error for f in report.failed) == ["ProtocolError", "UnresolvableArgument"]
    assert "round_0000/ADD_0.proof.jsonl" in [f.file for f in report.failed]

    assert len(check_corpus(logs_dir, seed_registry, earlier_only=False).failed) == 1


def test_corrupted_files_are_itemized(seed_registry, seed_logs, workdir):
    for log in seed_logs[:3]:
        log.write(proof_log_path(workdir / "human", log.name))

    bad_arg = _self_citing_log(seed_registry, "ADD_0")
    bad_arg.steps[0].args = ["12x4"]
    bad_arg.write(proof_log_path(workdir / "round_0000", "ADD_0"))
    bad_summary = _log(seed_logs, "ADD_0_1").model_copy(deep=True)
    bad_summary.summary.fingerprint = "not-a-number"
    bad_summary.write(proof_log_path(workdir / "round_0000", "ADD_0_1"))

    report = check_corpus(workdir, seed_registry)
    assert report.checked == 3
    failures = {f.file: f for f in report.failed}
    assert failures["round_0000/ADD_0.proof.jsonl"].error == "UnresolvableArgument"
    assert failures["round_0000/ADD_0_1.proof.jsonl"].error == "CheckFailure"
    assert failures["round_0000/ADD_0_1.proof.jsonl"].step == 0


def test_empty_directory(seed_registry, workdir):
    report = check_corpus(workdir, seed_registry)
    assert report.ok
    assert report.checked == 0


def test_found_proofs_replay_through_the_checker(seed_registry, seed_logs, scaled, workdir):
    """Every proof the searcher finds over the seed corpus checks, with earlier theorems only"""
    options = ProverOptions(
        node_budget=scaled(12, 100), total_timeout_s=scaled(5.0, 60.0), tactic_timeout_s=scaled(0.5, 2.0)
    )
    policy = make_policy(PolicyKind.baseline_tfidf, seed_registry, seed_logs)
    proved = []
    for log in seed_logs[::scaled(16, 1)]:
        fp = log.summary.fingerprint
        target = LoopTarget(label=log.name, goal=log.root, fingerprint=fp, owner=fp)
        result = prove_target(seed_registry, target, policy, options, workdir)
        if result.log_file is not None:
            proved.append(ProofLog.read(Path(result.log_file)))

    assert proved
    for log in proved:
        theorem = check_proof(log, seed_registry)
        assert proves(theorem, log.root_goal(seed_registry.env))
    report = check_corpus(workdir, seed_registry, workers=2)
    assert report.ok
    assert report.checked == len(proved)
