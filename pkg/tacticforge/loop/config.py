"""
Loop configuration files: `key=value` lines, `#` comments.
"""
import logging

from pathlib import Path

from pydantic import BaseModel, Field, ValidationError, model_validator

from tacticforge.errors import LoopConfigError
from tacticforge.policy.model import PolicyVariant


logger = logging.getLogger(__name__)


class LoopConfig(BaseModel, extra="forbid"):
    rounds: int = Field(10, ge=0)
    sample_size: int = Field(64, ge=1)
    fleet_size: int = Field(8, ge=1)
    k: int = Field(2, ge=1)
    mix_human: float = Field(0.4, ge=0)
    mix_inherited: float = Field(0.1, ge=0)
    mix_fresh: float = Field(0.3, ge=0)
    mix_historical: float = Field(0.2, ge=0)
    batch_size: int = Field(32, ge=1)
    pretrain_steps: int = Field(200, ge=0)
    train_steps: int = Field(100, ge=0)
    node_budget: int = Field(100, ge=1)
    total_timeout_s: float = Field(60.0, gt=0)
    tactic_timeout_s: float = Field(2.0, gt=0)
    seed: int = 0
    seedless: bool = False
    loop_on_subgoals: bool = False
    shadow_trainer: bool = False
    variant: PolicyVariant = PolicyVariant.tactic_dependent

    @model_validator(mode="after")
    def check_mix(self):
        total = self.mix_human + self.mix_inherited + self.mix_fresh + self.mix_historical
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"mix ratios must sum to 1, got {total}")
        return self

    @property
    def mix(self) -> tuple[float, float, float, float]:
        return self.mix_human, self.mix_inherited, self.mix_fresh, self.mix_historical


def parse_loop_config(text: str, source: str = "<string>", **overrides) -> LoopConfig:
    """
    Raises:
        LoopConfigError: a line is not `key=value`, a key is repeated or unknown, or a value is invalid
    """

    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise LoopConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise LoopConfigError(f"{source}:{lineno}: {key} set twice")
        values[key] = value
    values.update(overrides)

    try:
        return LoopConfig.model_validate(values)
    except ValidationError as e:
        logger.error(f"Validation error for {LoopConfig.__name__}: {e}")
        raise LoopConfigError(f"{source}: {e}") from e


def read_loop_config(path: Path, **overrides) -> LoopConfig:
    path = Path(path)
    if not path.exists():
        raise LoopConfigError(f"no loop configuration at {path}")
    return parse_loop_config(path.read_text(encoding="utf-8"), str(path), **overrides)
