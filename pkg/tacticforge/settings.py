import logging

from pathlib import Path
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


logger = logging.getLogger(__name__)


DEFAULT_TACTICS = [
    "ACCEPT_TAC",
    "REFL_TAC",
    "CONJ_TAC",
    "DISJ1_TAC",
    "DISJ2_TAC",
    "DISCH_TAC",
    "UNDISCH_TAC0",
    "GEN_TAC",
    "EQ_TAC",
    "MATCH_MP_TAC",
    "MP_TAC",
    "REWRITE_TAC",
    "ASM_REWRITE_TAC",
    "PURE_ONCE_REWRITE_TAC",
    "MESON_TAC",
    "ASM_MESON_TAC",
    "CONTR_TAC",
    "ITAUT_TAC",
]


class Settings(BaseSettings):

    model_config = SettingsConfigDict(
        env_file=[
            str(Path(__file__).parents[1] / ".env"),
        ],
        env_file_encoding="utf-8",
        env_prefix="TACTICFORGE_",
        case_sensitive=False,
        extra="ignore",
    )

    workdir: Path = Field(Path.cwd() / "tacticforge_work")
    snapshot: Path | None = None

    tactics: list[str] = Field(default_factory=lambda: list(DEFAULT_TACTICS))

    # prover budgets
    tactic_timeout_s: float = 5.0
    total_timeout_s: float = 300.0
    node_budget: int = 100
    meson_max_depth: int = 12
    rewrite_step_cap: int = 10_000

    # policy model
    embedding_dim: int = 64
    hash_buckets: int = 16_384
    combiner_width: int = 128
    learning_rate: float = 0.05
    lr_decay_rate: float = 0.98
    lr_decay_steps: int = 1_000
    ema_rate: float = 0.9999
    random_negatives: int = 4


def get_settings():
    return Settings()
