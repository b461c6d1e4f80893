import numpy as np

from pydantic import BaseModel, Field

from tacticforge.settings import Settings, get_settings


MAX_TOP_TACTICS_RANGE = (6, 16)
MAX_SUCCESSFUL_APPS_RANGE = (3, 6)
NUM_TACTIC_ARGS_RANGE = (1, 32)


class ProverOptions(BaseModel, frozen=True):
    max_top_tactics: int = Field(10, ge=1)
    max_successful_apps: int = Field(5, ge=1)
    num_tactic_args: int = Field(16, ge=0)
    node_budget: int = Field(100, ge=1)
    total_timeout_s: float = Field(300.0, gt=0)
    tactic_timeout_s: float = Field(5.0, gt=0)

    @classmethod
    def from_settings(cls, settings: Settings | None = None, **overrides) -> "ProverOptions":
        settings = settings or get_settings()
        values = dict(
            node_budget=settings.node_budget,
            total_timeout_s=settings.total_timeout_s,
            tactic_timeout_s=settings.tactic_timeout_s,
        )
        values.update(overrides)
        return cls(**values)


def sample_options(rng_seed: int, base: ProverOptions | None = None) -> ProverOptions:
    """
    Randomized search parameters for one proof attempt. The three sampled
    fields are uniform over their inclusive ranges; budgets come from `base`.
    """

    base = base or ProverOptions()
    rng = np.random.default_rng(rng_seed)
    return base.model_copy(update=dict(
        max_top_tactics=int(rng.integers(MAX_TOP_TACTICS_RANGE[0], MAX_TOP_TACTICS_RANGE[1] + 1)),
        max_successful_apps=int(rng.integers(MAX_SUCCESSFUL_APPS_RANGE[0], MAX_SUCCESSFUL_APPS_RANGE[1] + 1)),
        num_tactic_args=int(rng.integers(NUM_TACTIC_ARGS_RANGE[0], NUM_TACTIC_ARGS_RANGE[1] + 1)),
    ))
