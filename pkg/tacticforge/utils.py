from pathlib import Path

from tacticforge.settings import get_settings


WORKDIR_KINDS = ("theory", "logs", "examples", "checkpoints", "metrics")


def make_workdir_path(
        kind: str,
        label: str,
        suffix: str = ".jsonl",
        workdir: Path | None = None,
) -> Path:

    if kind not in WORKDIR_KINDS:
        raise ValueError(f"Unknown workdir area: {kind}")

    root = workdir if workdir is not None else get_settings().workdir
    dirpath = root / kind
    dirpath.mkdir(exist_ok=True, parents=True)
    path = dirpath / f"{label}{suffix}"

    return path


def make_workdir_dir(
        kind: str,
        workdir: Path | None = None,
) -> Path:

    if kind not in WORKDIR_KINDS:
        raise ValueError(f"Unknown workdir area: {kind}")

    root = workdir if workdir is not None else get_settings().workdir
    dirpath = root / kind
    dirpath.mkdir(exist_ok=True, parents=True)

    return dirpath
