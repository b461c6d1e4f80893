"""
The four training example pools of the loop and batch mixing.

Loop examples produced in round r are fresh during rounds r+1 to r+k and
historical afterwards. Membership is derived from the round counter, so an
example is always in exactly one of the two.
"""
import logging
import math

from typing import Sequence

import numpy as np

from tacticforge.data.examples import TrainingExample
from tacticforge.errors import AllPoolsEmpty


logger = logging.getLogger(__name__)


POOL_NAMES = ("human", "inherited", "fresh", "historical")
DEFAULT_MIX = (0.4, 0.1, 0.3, 0.2)


class ExamplePools:

    def __init__(
            self,
            human: Sequence[TrainingExample] = (),
            inherited: Sequence[TrainingExample] = (),
            k: int = 2,
            mix: Sequence[float] = DEFAULT_MIX,
    ):
        if k < 1:
            raise ValueError(f"freshness window must be at least 1, got {k}")
        if len(mix) != len(POOL_NAMES) or any(r < 0 for r in mix) or not math.isclose(sum(mix), 1.0):
            raise ValueError(f"mix must be four non-negative ratios summing to 1, got {mix}")
        self.human = list(human)
        self.inherited = list(inherited)
        self.k = k
        self.mix = tuple(float(r) for r in mix)
        self.current_round = 0
        self._by_round: dict[int, list[TrainingExample]] = {}

    @classmethod
    def seedless(cls, k: int = 2, mix: Sequence[float] = DEFAULT_MIX) -> "ExamplePools":
        return cls((), (), k, mix)

    def add_round(self, round: int, examples: Sequence[TrainingExample]) -> None:
        """Add the examples produced in `round`; the pools move on to the following round."""

        self._by_round.setdefault(round, []).extend(examples)
        self.current_round = max(self.current_round, round + 1)
        logger.debug(f"Round {round} added {len(examples)} examples; pools now at round {self.current_round}")

    def advance_to(self, round: int) -> None:
        self.current_round = max(self.current_round, round)

    @property
    def fresh(self) -> list[TrainingExample]:
        first = self.current_round - self.k
        return [
            ex for r in sorted(self._by_round) if first <= r < self.current_round for ex in self._by_round[r]
        ]

    @property
    def historical(self) -> list[TrainingExample]:
        first = self.current_round - self.k
        return [ex for r in sorted(self._by_round) if r < first for ex in self._by_round[r]]

    def pools(self) -> list[list[TrainingExample]]:
        return [self.human, self.inherited, self.fresh, self.historical]

    def sizes(self) -> dict[str, int]:
        return {name: len(pool) for name, pool in zip(POOL_NAMES, self.pools())}

    def loop_examples(self) -> list[TrainingExample]:
        return [ex for r in sorted(self._by_round) for ex in self._by_round[r]]


def batch_counts(sizes: Sequence[int], mix: Sequence[float], batch_size: int) -> list[int]:
    """
    Examples to draw from each pool. Shares of empty pools go to the others
    in proportion to their ratios; the fresh pool gets at least the ceiling
    of its share; leftover slots go to the largest fractional shares.

    Raises:
        AllPoolsEmpty: every pool is empty, or every non-empty pool has ratio zero
    """

    weights = [r if n > 0 else 0.0 for r, n in zip(mix, sizes)]
    total = sum(weights)
    if total <= 0:
        raise AllPoolsEmpty("no training examples in any pool with a positive ratio")
    quotas = [batch_size * w / total for w in weights]

    counts = [math.floor(q + 1e-9) for q in quotas]
    fresh = POOL_NAMES.index("fresh")
    if weights[fresh] > 0:
        counts[fresh] = math.ceil(quotas[fresh] - 1e-9)

    remainders = sorted(
        (i for i in range(len(quotas)) if weights[i] > 0 and i != fresh),
        key=lambda i: (-(quotas[i] - counts[i]), i),
    )
    leftover = batch_size - sum(counts)
    for i in remainders[:max(leftover, 0)]:
        counts[i] += 1
    leftover = batch_size - sum(counts)
    if leftover > 0:
        counts[next(i for i, w in enumerate(weights) if w > 0)] += leftover
    return counts


def mix_batch(pools: ExamplePools, batch_size: int, rng: np.random.Generator) -> list[TrainingExample]:
    """
    Draw a training batch according to the pool ratios. Within a pool,
    examples are drawn without replacement unless the pool is smaller than
    its share.

    Raises:
        AllPoolsEmpty: there is nothing to draw from
    """

    contents = pools.pools()
    counts = batch_counts([len(c) for c in contents], pools.mix, batch_size)
    batch = []
    for pool, count in zip(contents, counts):
        if count == 0:
            continue
        picks = rng.choice(len(pool), size=count, replace=count > len(pool))
        batch.extend(pool[int(i)] for i in picks)
    order = rng.permutation(len(batch))
    return [batch[int(i)] for i in order]
