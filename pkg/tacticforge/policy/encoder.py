"""
Hashed bag-of-tokens featurization of terms.

Terms are tokenized from their normalized alpha-canonical print, so alpha
variants and renamings of machine-generated names share features.
"""
import hashlib

from functools import lru_cache

import numpy as np

from tacticforge.kernel.terms import TermExpr
from tacticforge.sexpr.fingerprint import normalized_print
from tacticforge.sexpr.sexpr import tokenize_canonical


def term_tokens(tm: TermExpr) -> list[str]:
    return tokenize_canonical(normalized_print(tm))


@lru_cache(maxsize=1 << 16)
def token_bucket(token: str, buckets: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % buckets


def token_ids(tm: TermExpr, buckets: int) -> np.ndarray:
    """Bucket index of every token of the term, in print order."""

    return np.fromiter((token_bucket(t, buckets) for t in term_tokens(tm)), dtype=np.int64)


def bag_of_tokens(table: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """Sum of the bucket vectors divided by the square root of the token count."""

    if len(ids) == 0:
        return np.zeros(table.shape[1])
    return table[ids].sum(axis=0) / np.sqrt(len(ids))
