"""
Binary policy checkpoints.

Layout, all little-endian:
    magic b"TFPC"
    uint32 version, dim, buckets, width, n_tactics, variant code, has_average
    uint64 step
    uint32 length + UTF-8 JSON list of tactic names
    float32 parameters in PARAM_NAMES order
    float32 averaged parameters in the same order, when has_average is 1

Writes go to a temporary file that replaces the target, so a reader sees
either the old or the new checkpoint.
"""
import json
import logging

from pathlib import Path

import numpy as np

from tacticforge.errors import CorruptCheckpoint
from tacticforge.policy.model import PARAM_NAMES, Params, PolicyModel, PolicyVariant, param_shapes


logger = logging.getLogger(__name__)


MAGIC = b"TFPC"
CHECKPOINT_VERSION = 1

_VARIANT_CODES = {PolicyVariant.tactic_dependent: 0, PolicyVariant.unconditioned: 1}
_HEADER_FIELDS = 7


def _param_bytes(params: Params) -> bytes:
    return b"".join(np.asarray(params[name], dtype="<f4").tobytes() for name in PARAM_NAMES)


def save_checkpoint(model: PolicyModel, path: Path, averaged: Params | None = None) -> Path:
    """
    Write `model`, plus the averaged parameters used for evaluation when given.
    """

    names = json.dumps(model.tactics).encode("utf-8")
    header = np.array(
        [
            CHECKPOINT_VERSION,
            model.dim,
            model.buckets,
            model.width,
            len(model.tactics),
            _VARIANT_CODES[model.variant],
            int(averaged is not None),
        ],
        dtype="<u4",
    )
    parts = [
        MAGIC,
        header.tobytes(),
        np.array([model.step], dtype="<u8").tobytes(),
        np.array([len(names)], dtype="<u4").tobytes(),
        names,
        _param_bytes(model.params),
    ]
    if averaged is not None:
        parts.append(_param_bytes(averaged))

    path.parent.mkdir(exist_ok=True, parents=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(b"".join(parts))
    tmp.replace(path)
    logger.info(f"Saved checkpoint at step {model.step} to {path}")
    return path


class _Reader:

    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise CorruptCheckpoint(f"{self.path}: truncated checkpoint")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def array(self, dtype: str, count: int) -> np.ndarray:
        width = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(width * count), dtype=dtype)

    def params(self, shapes: dict[str, tuple[int, ...]]) -> Params:
        params = {}
        for name in PARAM_NAMES:
            shape = shapes[name]
            values = self.array("<f4", int(np.prod(shape))).astype(np.float64)
            params[name] = values.reshape(shape)
        return params


def load_checkpoint(path: Path, averaged: bool = True) -> PolicyModel:
    """
    Load a checkpoint. With `averaged`, the averaged parameters are used when
    the file has them.

    Raises:
        CorruptCheckpoint: bad magic, version, or size
    """

    reader = _Reader(Path(path).read_bytes(), path)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CorruptCheckpoint(f"{path}: not a policy checkpoint")
    version, dim, buckets, width, n_tactics, variant_code, has_average = (
        int(v) for v in reader.array("<u4", _HEADER_FIELDS)
    )
    if version != CHECKPOINT_VERSION:
        raise CorruptCheckpoint(f"{path}: unsupported checkpoint version {version}")
    step = int(reader.array("<u8", 1)[0])
    (name_length,) = reader.array("<u4", 1)
    try:
        tactics = json.loads(reader.take(int(name_length)).decode("utf-8"))
        variant = next(v for v, code in _VARIANT_CODES.items() if code == variant_code)
    except (ValueError, StopIteration) as e:
        raise CorruptCheckpoint(f"{path}: bad metadata") from e
    if len(tactics) != n_tactics:
        raise CorruptCheckpoint(f"{path}: tactic count mismatch")

    shapes = param_shapes(dim, buckets, width, n_tactics)
    params = reader.params(shapes)
    if has_average:
        average = reader.params(shapes)
        if averaged:
            params = average
    if reader.offset != len(reader.data):
        raise CorruptCheckpoint(f"{path}: trailing bytes")
    logger.info(f"Loaded checkpoint at step {step} from {path}")
    return PolicyModel(params, tactics, variant, step)


def premise_cache_path(checkpoint: Path) -> Path:
    return checkpoint.with_name(f"{checkpoint.stem}.premises.npz")


def save_premise_cache(model: PolicyModel, path: Path) -> Path:
    """Premise embeddings computed so far, keyed by (step, fingerprint)."""

    cached = model.cached_premises()
    fps = np.array(sorted(cached), dtype=np.uint64)
    embeddings = np.array([cached[int(fp)] for fp in fps]).reshape(len(fps), model.dim)
    path.parent.mkdir(exist_ok=True, parents=True)
    with open(path, "wb") as f:
        np.savez(f, step=np.array([model.step]), fingerprints=fps, embeddings=embeddings)
    return path


def load_premise_cache(model: PolicyModel, path: Path) -> int:
    """Seed the model's premise cache from a file written at the same step."""

    with np.load(path) as data:
        if int(data["step"][0]) != model.step:
            logger.warning(f"Ignoring premise cache {path} from another checkpoint step")
            return 0
        for fp, embedding in zip(data["fingerprints"], data["embeddings"]):
            model.remember_premise(int(fp), embedding)
        return len(data["fingerprints"])
