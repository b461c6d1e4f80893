"""
Theorem-level train/valid/test splits.

The split is a function of the theorem fingerprint alone: the last decimal
digit 0-5 is TRAIN, 6-7 VALID and 8-9 TEST. Subgoals take the split of the
theorem whose proof produced them.
"""
import logging

from collections import Counter
from enum import Enum
from typing import Iterable

from pydantic import BaseModel

from tacticforge.errors import LockedSplit


logger = logging.getLogger(__name__)


class Split(str, Enum):
    train = "TRAIN"
    valid = "VALID"
    test = "TEST"


def split_of(fp: int) -> Split:
    bucket = fp % 10
    if bucket <= 5:
        return Split.train
    if bucket <= 7:
        return Split.valid
    return Split.test


class SplitAssignment(BaseModel):
    assignments: dict[str, Split] = {}

    def split(self, fp: int) -> Split:
        return self.assignments.get(str(fp)) or split_of(fp)

    def members(self, split: Split) -> list[int]:
        return [int(fp) for fp, s in self.assignments.items() if s == split]

    def counts(self) -> dict[str, int]:
        counter = Counter(s.value for s in self.assignments.values())
        return {split.value: counter.get(split.value, 0) for split in Split}


def assign_splits(fingerprints: Iterable[int]) -> SplitAssignment:
    assignment = SplitAssignment(assignments={str(fp): split_of(fp) for fp in fingerprints})
    logger.info(f"Assigned splits {assignment.counts()}")
    return assignment


def check_unlocked(split: Split, unlock_test: bool) -> None:
    """
    Raises:
        LockedSplit: TEST was requested without unlocking it
    """

    if split == Split.test and not unlock_test:
        raise LockedSplit("the TEST split is reserved for final assessment; pass --unlock-test")
