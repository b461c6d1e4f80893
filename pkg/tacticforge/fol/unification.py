"""
Robinson unification with occurs check over first-order terms.

Substitutions are dicts from variables to terms and are kept idempotent: no
variable bound in a substitution occurs in any of its values.
"""
from tacticforge.errors import Clash, OccursCheck
from tacticforge.fol.first_order import FOApp, FOTerm, FOVar

Substitution = dict[FOVar, FOTerm]


def apply_substitution(sigma: Substitution, term: FOTerm) -> FOTerm:
    if not sigma:
        return term
    if isinstance(term, FOVar):
        return sigma.get(term, term)
    if not term.args:
        return term
    return FOApp(term.symbol, tuple(apply_substitution(sigma, arg) for arg in term.args), term.ty)


def occurs_in(v: FOVar, term: FOTerm) -> bool:
    if isinstance(term, FOVar):
        return term == v
    return any(occurs_in(v, arg) for arg in term.args)


def compose_substitutions(r: Substitution, s: Substitution) -> Substitution:
    """The substitution applying r first and then s."""

    s1 = {k: v for k, v in s.items() if k not in r}
    r1 = {}
    for k, v in r.items():
        v = apply_substitution(s, v)
        if isinstance(v, FOVar) and v == k:
            continue
        r1[k] = v
    return {**r1, **s1}


def _unify(p: FOTerm, q: FOTerm) -> Substitution:
    if isinstance(p, FOVar):
        if p == q:
            return {}
        if occurs_in(p, q):
            raise OccursCheck(f"{p!r} occurs in {q!r}")
        return {p: q}

    if isinstance(q, FOVar):
        return _unify(q, p)

    if p.symbol != q.symbol or len(p.args) != len(q.args):
        raise Clash(f"{p.symbol} does not unify with {q.symbol}")

    rv: Substitution = {}
    for x, y in zip(p.args, q.args):
        x = apply_substitution(rv, x)
        y = apply_substitution(rv, y)
        rv = compose_substitutions(rv, _unify(x, y))
    return rv


def unify(p: FOTerm, q: FOTerm, sigma: Substitution | None = None) -> Substitution:
    """
    Most general unifier of p and q extending sigma.

    Raises:
        Clash: different function symbols or arities
        OccursCheck: a variable would be bound to a term containing it
    """

    sigma = sigma or {}
    mgu = _unify(apply_substitution(sigma, p), apply_substitution(sigma, q))
    return compose_substitutions(sigma, mgu)
