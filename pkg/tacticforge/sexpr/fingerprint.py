"""
Stable 64-bit fingerprints of terms, goals and theorems.

A fingerprint is computed from the alpha-canonical print of the normalized
term, so alpha-equivalent terms and terms differing only in machine-generated
names share a fingerprint. Zero is never produced.
"""
import hashlib

from tacticforge.kernel.terms import TermExpr
from tacticforge.sexpr.codec import alpha_key
from tacticforge.sexpr.normalization import normalize


HYP_SEPARATOR = "\x1f"
CONCLUSION_SEPARATOR = "\x1e"


def normalized_print(tm: TermExpr) -> str:
    cached = tm._cache.get("normalized_print")
    if cached is None:
        cached = alpha_key(normalize(tm))
        tm._cache["normalized_print"] = cached
    return cached


def fingerprint_text(text: str) -> int:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    value = int.from_bytes(digest[-8:], "big")
    return value or 1


def term_fingerprint(tm: TermExpr) -> int:
    cached = tm._cache.get("fingerprint")
    if cached is None:
        cached = fingerprint_text(normalized_print(tm))
        tm._cache["fingerprint"] = cached
    return cached


def sequent_text(hyps, conclusion: TermExpr) -> str:
    hyp_prints = sorted(normalized_print(h) for h in hyps)
    return HYP_SEPARATOR.join(hyp_prints) + CONCLUSION_SEPARATOR + normalized_print(conclusion)


def sequent_fingerprint(hyps, conclusion: TermExpr) -> int:
    return fingerprint_text(sequent_text(hyps, conclusion))


def fingerprint(obj) -> int:
    """
    Fingerprint a term, or anything with `hyps` and `conclusion` (goals and theorems).
    """

    if hasattr(obj, "conclusion") and hasattr(obj, "hyps"):
        return sequent_fingerprint(obj.hyps, obj.conclusion)
    return term_fingerprint(obj)
