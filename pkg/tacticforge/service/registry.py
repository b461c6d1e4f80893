"""
Append-only store of theorems addressed by fingerprint.
"""
import logging
import threading

from typing import Iterator

from pydantic import BaseModel

from tacticforge.errors import FingerprintMismatch, UnknownFingerprint
from tacticforge.kernel.bootstrap import new_environment
from tacticforge.kernel.environment import Environment
from tacticforge.kernel.theorem import Theorem
from tacticforge.sexpr.fingerprint import fingerprint


logger = logging.getLogger(__name__)


class RegistryEntry(BaseModel, frozen=True, arbitrary_types_allowed=True):
    fingerprint: int
    theorem: Theorem
    name: str | None = None


class TheoremRegistry:
    """
    Theorems keyed by fingerprint, with the insertion order kept as a journal
    for snapshotting. Registration goes through a single lock; lookups read
    a dict that is only ever added to.

    The registry carries the environment its statements are typed in.
    """

    def __init__(self, env: Environment | None = None):
        self.env = env if env is not None else new_environment()
        self._entries: dict[int, RegistryEntry] = {}
        self._names: dict[str, int] = {}
        self._journal: list[int] = []
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._journal)

    def __contains__(self, fp: int) -> bool:
        return fp in self._entries

    def __iter__(self) -> Iterator[RegistryEntry]:
        for fp in list(self._journal):
            yield self._entries[fp]

    def register(self, theorem: Theorem, client_fingerprint: int | None = None, name: str | None = None) -> int:
        """
        Register a theorem and return its fingerprint. Registering the same
        statement again returns the existing fingerprint.

        Raises:
            FingerprintMismatch: the client supplied a fingerprint that is not the recomputed one
        """

        fp = fingerprint(theorem)
        if client_fingerprint is not None and client_fingerprint != fp:
            raise FingerprintMismatch(f"client fingerprint {client_fingerprint} differs from {fp}")
        with self._lock:
            if fp not in self._entries:
                self._entries[fp] = RegistryEntry(fingerprint=fp, theorem=theorem, name=name)
                self._journal.append(fp)
                logger.debug(f"Registered {name or fp}")
            if name is not None and name not in self._names:
                self._names[name] = fp
        return fp

    def get(self, fp: int) -> Theorem:
        try:
            return self._entries[fp].theorem
        except KeyError:
            raise UnknownFingerprint(f"no theorem registered under {fp}")

    def entry(self, fp: int) -> RegistryEntry:
        try:
            return self._entries[fp]
        except KeyError:
            raise UnknownFingerprint(f"no theorem registered under {fp}")

    def by_name(self, name: str) -> Theorem:
        return self.get(self.fingerprint_of(name))

    def fingerprint_of(self, name: str) -> int:
        try:
            return self._names[name]
        except KeyError:
            raise UnknownFingerprint(f"no theorem registered under the name {name}")

    def has_name(self, name: str) -> bool:
        return name in self._names

    def names(self) -> dict[str, int]:
        return dict(self._names)

    def fingerprints(self) -> list[int]:
        return list(self._journal)
