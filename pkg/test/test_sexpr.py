import json

import numpy as np
import pytest

from tacticforge.errors import EmptyInput, SExprError, TrailingGarbage, UnbalancedParens, UnknownTag
from tacticforge.kernel.terms import Abs, Comb, Var, mk_eq
from tacticforge.kernel.types import BOOL, TyApp, TyVar, fun_type
from tacticforge.sexpr.codec import decode_term, encode_term, parse_term, print_term
from tacticforge.sexpr.fingerprint import fingerprint, sequent_text
from tacticforge.sexpr.normalization import normalize
from tacticforge.sexpr.sexpr import Atom, SList, parse, print_sexpr, tokenize, tokenize_text


EXAMPLE = "(a (v (fun (real) real) f) (v real x))"


def _random_sexpr(rng, depth=0):
    if depth > 3 or rng.random() < 0.3:
        return Atom(f"t{int(rng.integers(0, 50))}")
    return SList([_random_sexpr(rng, depth + 1) for _ in range(int(rng.integers(0, 4)))])


def test_parse_example_application():
    """Parse the printed application example into a two-argument node"""
    sexpr = parse(EXAMPLE)
    assert isinstance(sexpr, SList)
    assert sexpr[0] == Atom("a")
    assert len(sexpr) == 3


def test_parse_atom():
    assert parse("x") == Atom("x")


def test_parse_normalizes_whitespace():
    assert print_sexpr(parse("  ( a\n (b   c)\t)  ")) == "(a (b c))"


@pytest.mark.parametrize("text, error", [
    ("((", UnbalancedParens),
    (")", UnbalancedParens),
    ("", EmptyInput),
    ("   ", EmptyInput),
    ("(a) b", TrailingGarbage),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse(text)


def test_unbalanced_parens_reports_position():
    with pytest.raises(UnbalancedParens) as e:
        parse("(a (b c)")
    assert e.value.position == 0


def test_print_parse_round_trip(scaled):
    rng = np.random.default_rng(0)
    for _ in range(scaled(500, 10_000)):
        sexpr = _random_sexpr(rng)
        text = print_sexpr(sexpr)
        assert parse(text) == sexpr
        assert print_sexpr(parse(text)) == text


def test_encode_example_term():
    real = TyVar("real")
    f = Var("f", fun_type(real, real))
    x = Var("x", real)
    assert print_sexpr(encode_term(Comb(f, x))) == EXAMPLE
    assert decode_term(parse(EXAMPLE), None) == Comb(f, x)


def test_decode_unknown_tag():
    with pytest.raises(UnknownTag):
        decode_term(parse("(q x)"), None)


def test_abstraction_round_trip(env):
    p = Var("p", BOOL)
    tm = Abs(p, mk_eq(p, p))
    text = print_term(tm)
    assert text.startswith("(l (v bool p) ")
    assert parse_term(text, env) == tm


def test_seed_statements_round_trip(seed_registry):
    for entry in seed_registry:
        text = print_term(entry.theorem.conclusion)
        assert print_term(parse_term(text, seed_registry.env)) == text


def test_tokenize():
    assert tokenize_text("(v real x)") == ["(", "v", "real", "x", ")"]
    # every parenthesis and atom counts
    assert len(tokenize(parse(EXAMPLE))) == 19
    with pytest.raises(EmptyInput):
        tokenize_text("")


def test_normalize_generic_types():
    """Generic type names are numbered by first occurrence in preorder"""
    first = TyVar("?345882")
    second = TyVar("?9")
    f = Var("f", fun_type(first, fun_type(second, BOOL)))
    tm = Comb(Comb(f, Var("a", first)), Var("b", second))
    normalized = normalize(tm)
    printed = print_term(normalized)
    assert "?345882" not in printed and "?9" not in printed
    assert printed == "(a (a (v (fun (t0) (fun (t1) bool)) f) (v t0 a)) (v t1 b))"
    assert normalize(normalized) == normalized


def test_normalize_generic_variables():
    v = Var("GEN%PVAR%9675", BOOL)
    assert normalize(mk_eq(v, v)) == mk_eq(Var("g0", BOOL), Var("g0", BOOL))


def test_normalize_leaves_ordinary_terms_unchanged():
    p = Var("p", BOOL)
    tm = mk_eq(p, p)
    assert normalize(tm) == tm


def test_fingerprint_alpha_invariance():
    x = Var("x", TyApp("bool"))
    y = Var("y", TyApp("bool"))
    assert fingerprint(Abs(x, mk_eq(x, x))) == fingerprint(Abs(y, mk_eq(y, y)))
    assert fingerprint(mk_eq(x, x)) != fingerprint(mk_eq(x, y))


def test_fingerprint_of_generic_names_is_stable():
    a = Var("GEN%PVAR%1", BOOL)
    b = Var("GEN%PVAR%77", BOOL)
    assert fingerprint(mk_eq(a, a)) == fingerprint(mk_eq(b, b))


def test_golden_fingerprint():
    """SHA-256 of the canonical print, low 64 bits"""
    assert fingerprint(decode_term(parse(EXAMPLE), None)) == 0xD4CD18C7977DFF3A


def test_seed_fingerprints_are_distinct(seed_registry, seed_logs):
    """No two different sequents among the seed proof goals share a fingerprint"""
    by_text = {}
    for log in seed_logs:
        for step in log.steps:
            goal = step.goal.to_goal(seed_registry.env)
            by_text[sequent_text(goal.hyps, goal.conclusion)] = goal.fingerprint
    assert len(set(by_text.values())) == len(by_text)


def test_golden_seed_fingerprints(seed_registry, output_data_dir):
    with open(output_data_dir / "expected_seed_fingerprints.json") as f:
        expected = json.load(f)
    assert len(expected) >= 50
    assert {name: str(seed_registry.fingerprint_of(name)) for name in expected} == expected


def test_unicode_whitespace_separates_atoms():
    assert print_sexpr(parse("(a\xa0b\x1fc d)")) == "(a b c d)"
    with pytest.raises(SExprError):
        Atom("a\xa0b")


def _random_generic_term(rng, offset, depth=0):
    """A random boolean term mixing generic and ordinary names, generic numbers shifted by `offset`"""
    def leaf(ty):
        k = int(rng.integers(0, 4))
        name = f"GEN%PVAR%{k + offset}" if rng.random() < 0.5 else ["x", "g0", "y"][k % 3]
        return Var(name, ty)

    def random_type():
        k = int(rng.integers(0, 3))
        return [TyVar(f"?{k + offset}"), BOOL, TyVar("a")][int(rng.integers(0, 3))]

    choice = int(rng.integers(0, 3)) if depth < 4 else 0
    if choice == 0:
        ty = random_type()
        return mk_eq(leaf(ty), leaf(ty))
    if choice == 1:
        return mk_eq(_random_generic_term(rng, offset, depth + 1), _random_generic_term(rng, offset, depth + 1))
    ty = random_type()
    bound = leaf(ty)
    return Comb(Abs(bound, _random_generic_term(rng, offset, depth + 1)), leaf(ty))


def test_normalization_is_idempotent_on_random_terms(scaled):
    for seed in range(scaled(200, 5_000)):
        tm = _random_generic_term(np.random.default_rng(seed), 0)
        shifted = _random_generic_term(np.random.default_rng(seed), 1_000)
        normalized = normalize(tm)
        assert normalize(normalized) == normalized
        assert fingerprint(normalized) == fingerprint(tm)
        assert fingerprint(shifted) == fingerprint(tm)
        assert "GEN%PVAR%" not in print_term(normalized)
