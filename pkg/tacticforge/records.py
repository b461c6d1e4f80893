import json
import logging

from pathlib import Path
from pydantic import BaseModel, ValidationError
from typing import Any, Iterable, Type, TypeVar


logger = logging.getLogger(__name__)


ModelT = TypeVar("ModelT", bound=BaseModel)


def dict_to_model(
    model_data: dict[str, Any],
    model_class: Type[ModelT],
) -> ModelT:

    try:
        return model_class.model_validate(model_data)
    except ValidationError as e:
        logger.error(
            f"Validation error for {model_class.__name__}: {e}"
        )
        raise


def save_model_to_json(
    label: str,
    model: BaseModel,
    output_dir: Path,
) -> Path:

    if not isinstance(model, BaseModel):
        raise TypeError("Object must be a Pydantic model")

    output_dir.mkdir(exist_ok=True, parents=True)
    model_path = output_dir / f"{label}.json"

    with open(model_path, "w") as f:
        json.dump(model.model_dump(mode="json"), f, indent=2)

    logger.info(f"Saved {model.__class__.__name__} to {model_path}")
    return model_path


def model_to_line(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def write_jsonl(path: Path, models: Iterable[BaseModel]) -> int:
    """Write one JSON object per line, keys sorted, so identical records give identical bytes."""

    path.parent.mkdir(exist_ok=True, parents=True)
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for model in models:
            f.write(model_to_line(model) + "\n")
            count += 1
    logger.info(f"Wrote {count} records to {path}")
    return count


def append_jsonl(path: Path, model: BaseModel) -> None:
    path.parent.mkdir(exist_ok=True, parents=True)
    with open(path, "a", encoding="utf-8") as f:
        f.write(model_to_line(model) + "\n")


def read_jsonl(path: Path, model_class: Type[ModelT]) -> list[ModelT]:
    """Read records, skipping lines that are not valid JSON or do not validate."""

    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(model_class.model_validate(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as e:
                logger.warning(f"Skipping malformed line {lineno} of {path}: {e}")
    return records
