"""
Registry snapshots for fast startup.

A snapshot is a header line followed by one JSON record per line: first the
type operators, then the constants and definitions beyond the boolean theory
in declaration order, then the axioms, then every registered theorem in
journal order. The header carries the record count and a SHA-256 of the
body. Loading rebuilds the signature, definitions and axioms in a fresh
environment and re-seals each theorem with its recorded provenance instead
of replaying its proof.
"""
import hashlib
import json
import logging

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ValidationError

from tacticforge.errors import CorruptSnapshot, FingerprintMismatch, KernelError, SExprError
from tacticforge.kernel.bootstrap import new_environment
from tacticforge.kernel.theorem import Provenance
from tacticforge.records import model_to_line
from tacticforge.service.registry import TheoremRegistry
from tacticforge.sexpr.codec import parse_term, parse_type, print_term, print_type


logger = logging.getLogger(__name__)


SNAPSHOT_FORMAT = "tacticforge-snapshot"
SNAPSHOT_VERSION = 2


class SnapshotHeader(BaseModel):
    format: Literal["tacticforge-snapshot"] = SNAPSHOT_FORMAT
    version: int = SNAPSHOT_VERSION
    count: int
    sha256: str


class TypeRecord(BaseModel):
    record: Literal["type"] = "type"
    name: str
    arity: int


class ConstantRecord(BaseModel):
    record: Literal["const"] = "const"
    name: str
    type: str


class DefinitionRecord(BaseModel):
    record: Literal["definition"] = "definition"
    name: str
    body: str


class AxiomRecord(BaseModel):
    record: Literal["axiom"] = "axiom"
    name: str
    conclusion: str


class TheoremRecord(BaseModel):
    record: Literal["theorem"] = "theorem"
    fingerprint: str
    name: str | None = None
    hyps: list[str] = []
    conclusion: str
    provenance: Provenance = Provenance.imported


def _body_lines(registry: TheoremRegistry) -> list[str]:
    base = new_environment()
    env = registry.env
    lines = []
    for name, arity in env.type_operators.items():
        if name not in base.type_operators:
            lines.append(model_to_line(TypeRecord(name=name, arity=arity)))
    for name, ty in env.constants.items():
        if name in base.constants:
            continue
        if name in env.definitions:
            body, _ = env.definitions[name]
            lines.append(model_to_line(DefinitionRecord(name=name, body=print_term(body))))
        else:
            lines.append(model_to_line(ConstantRecord(name=name, type=print_type(ty))))
    for name, th in env.axioms.items():
        if name not in base.axioms:
            lines.append(model_to_line(AxiomRecord(name=name, conclusion=print_term(th.conclusion))))

    names = {fp: name for name, fp in registry.names().items()}
    for entry in registry:
        th = entry.theorem
        lines.append(model_to_line(TheoremRecord(
            fingerprint=str(entry.fingerprint),
            name=names.get(entry.fingerprint),
            hyps=[print_term(h) for h in th.hyps],
            conclusion=print_term(th.conclusion),
            provenance=th.provenance,
        )))
    return lines


def save_snapshot(registry: TheoremRegistry, path: Path) -> Path:
    """Write the registry's environment and theorems to `path`."""

    body = "".join(line + "\n" for line in _body_lines(registry)).encode("utf-8")
    header = SnapshotHeader(count=body.count(b"\n"), sha256=hashlib.sha256(body).hexdigest())

    path.parent.mkdir(exist_ok=True, parents=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write((model_to_line(header) + "\n").encode("utf-8"))
        f.write(body)
    tmp.replace(path)
    logger.info(f"Saved snapshot of {len(registry)} theorems to {path}")
    return path


def load_snapshot(path: Path) -> TheoremRegistry:
    """
    Rebuild a registry from a snapshot file.

    Raises:
        CorruptSnapshot: the header, checksum or any record is invalid
    """

    data = Path(path).read_bytes()
    header_line, sep, body = data.partition(b"\n")
    if not sep:
        raise CorruptSnapshot(f"{path}: missing header")
    try:
        header = SnapshotHeader.model_validate_json(header_line)
    except ValidationError as e:
        raise CorruptSnapshot(f"{path}: bad header") from e
    if header.version != SNAPSHOT_VERSION:
        raise CorruptSnapshot(f"{path}: unsupported version {header.version}")
    if hashlib.sha256(body).hexdigest() != header.sha256 or body.count(b"\n") != header.count:
        raise CorruptSnapshot(f"{path}: checksum mismatch")

    registry = TheoremRegistry(new_environment())
    env = registry.env
    try:
        for line in body.decode("utf-8").splitlines():
            record = json.loads(line)
            kind = record.get("record")
            if kind == "type":
                rec = TypeRecord.model_validate(record)
                env.new_type(rec.name, rec.arity)
            elif kind == "const":
                rec = ConstantRecord.model_validate(record)
                env.new_constant(rec.name, parse_type(rec.type, env))
            elif kind == "definition":
                rec = DefinitionRecord.model_validate(record)
                env.define(rec.name, parse_term(rec.body, env))
            elif kind == "axiom":
                rec = AxiomRecord.model_validate(record)
                env.new_axiom(rec.name, parse_term(rec.conclusion, env))
            elif kind == "theorem":
                rec = TheoremRecord.model_validate(record)
                th = env.restore(
                    [parse_term(h, env) for h in rec.hyps], parse_term(rec.conclusion, env), rec.provenance
                )
                registry.register(th, client_fingerprint=int(rec.fingerprint), name=rec.name)
            else:
                raise CorruptSnapshot(f"{path}: unknown record {kind!r}")
    except (ValueError, ValidationError, KernelError, SExprError, FingerprintMismatch) as e:
        raise CorruptSnapshot(f"{path}: {e}") from e

    logger.info(f"Loaded snapshot of {len(registry)} theorems from {path}")
    return registry
