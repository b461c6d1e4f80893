"""
First-order matching of terms modulo alpha-equivalence, with type matching.
"""
from tacticforge.errors import RuleMismatch, TypeMismatch
from tacticforge.kernel.terms import Abs, Comb, Const, TermExpr, Var, alpha_equal, frees
from tacticforge.kernel.types import TyVar, TypeExpr, type_match, type_subst


def _innermost(env: list[tuple[Var, Var]], v: Var, side: int) -> int:
    for i in range(len(env) - 1, -1, -1):
        if env[i][side] == v:
            return i
    return -1


def _match_type(pattern_ty, ty, tyinst):
    try:
        type_match(pattern_ty, ty, tyinst)
    except TypeMismatch as e:
        raise RuleMismatch(f"No match: {e}") from e


def _match(pattern, target, env, tyinst, theta, fixed):
    if isinstance(pattern, Var):
        pattern_level = _innermost(env, pattern, 0)
        if pattern_level >= 0:
            if not isinstance(target, Var) or _innermost(env, target, 1) != pattern_level:
                raise RuleMismatch("No match: bound variables differ")
            return
        if isinstance(target, Var) and _innermost(env, target, 1) >= 0:
            raise RuleMismatch("No match: pattern variable against bound variable")
        _match_type(pattern.ty, target.ty, tyinst)
        if pattern in fixed:
            if target != pattern:
                raise RuleMismatch(f"No match: {pattern.name} cannot be instantiated")
            return
        if env and any(_innermost(env, v, 1) >= 0 for v in frees(target)):
            raise RuleMismatch(f"No match: {pattern.name} would capture a bound variable")
        previous = theta.get(pattern)
        if previous is None:
            theta[pattern] = target
        elif not alpha_equal(previous, target):
            raise RuleMismatch(f"No match: {pattern.name} bound inconsistently")
        return

    if isinstance(pattern, Const):
        if not isinstance(target, Const) or target.name != pattern.name:
            raise RuleMismatch("No match: constants differ")
        _match_type(pattern.ty, target.ty, tyinst)
        return

    if isinstance(pattern, Comb):
        if not isinstance(target, Comb):
            raise RuleMismatch("No match: expected an application")
        _match(pattern.fn, target.fn, env, tyinst, theta, fixed)
        _match(pattern.arg, target.arg, env, tyinst, theta, fixed)
        return

    if not isinstance(target, Abs):
        raise RuleMismatch("No match: expected an abstraction")
    _match_type(pattern.bound.ty, target.bound.ty, tyinst)
    env.append((pattern.bound, target.bound))
    try:
        _match(pattern.body, target.body, env, tyinst, theta, fixed)
    finally:
        env.pop()


def term_match(
        pattern: TermExpr,
        target: TermExpr,
        fixed: frozenset[Var] = frozenset(),
) -> tuple[dict[TyVar, TypeExpr], dict[Var, TermExpr]]:
    """
    Find type and term instantiations taking `pattern` to `target`.

    Variables in `fixed` must match themselves. Raises RuleMismatch when no
    match exists.

    Returns:
        (type instantiation, term instantiation keyed by the pattern's variables)
    """

    tyinst: dict[TyVar, TypeExpr] = {}
    theta: dict[Var, TermExpr] = {}
    _match(pattern, target, [], tyinst, theta, fixed)
    tyinst = {k: v for k, v in tyinst.items() if k != v}
    return tyinst, theta


def retype_instantiation(tyinst, theta: dict[Var, TermExpr]) -> dict[Var, TermExpr]:
    return {Var(v.name, type_subst(tyinst, v.ty)): t for v, t in theta.items()}
