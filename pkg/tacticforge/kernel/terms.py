"""
Simply-typed lambda terms.

Terms are immutable. Structural equality (`==`) compares names exactly; use
`alpha_equal` to compare up to renaming of bound variables.
"""
from enum import Enum
from typing import Iterable, Union

from tacticforge.errors import NotAnEquation, TypeMismatch
from tacticforge.kernel.types import (
    BOOL,
    TyVar,
    TypeExpr,
    fun_type,
    is_fun_type,
    type_subst,
    type_vars,
)


class _Term:

    __slots__ = ()

    def __setattr__(self, key, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def cache(self) -> dict:
        return self._cache


class Var(_Term):

    __slots__ = ("name", "ty", "_hash", "_cache")

    def __init__(self, name: str, ty: TypeExpr):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "ty", ty)
        object.__setattr__(self, "_hash", hash(("v", name, ty)))
        object.__setattr__(self, "_cache", {})

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Var) and other.name == self.name and other.ty == self.ty
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r}, {self.ty!r})"


class Const(_Term):

    __slots__ = ("name", "ty", "_hash", "_cache")

    def __init__(self, name: str, ty: TypeExpr):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "ty", ty)
        object.__setattr__(self, "_hash", hash(("c", name, ty)))
        object.__setattr__(self, "_cache", {})

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Const) and other.name == self.name and other.ty == self.ty
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Const({self.name!r}, {self.ty!r})"


class Comb(_Term):

    __slots__ = ("fn", "arg", "ty", "_hash", "_cache")

    def __init__(self, fn: "TermExpr", arg: "TermExpr"):
        if not is_fun_type(fn.ty):
            raise TypeMismatch(f"Cannot apply a term of non-function type {fn.ty!r}")
        domain, codomain = fn.ty.args
        if domain != arg.ty:
            raise TypeMismatch(f"Argument type {arg.ty!r} does not match domain {domain!r}")
        object.__setattr__(self, "fn", fn)
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "ty", codomain)
        object.__setattr__(self, "_hash", hash(("a", fn._hash, arg._hash)))
        object.__setattr__(self, "_cache", {})

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Comb)
            and self._hash == other._hash
            and self.fn == other.fn
            and self.arg == other.arg
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Comb({self.fn!r}, {self.arg!r})"


class Abs(_Term):

    __slots__ = ("bound", "body", "ty", "_hash", "_cache")

    def __init__(self, bound: Var, body: "TermExpr"):
        if not isinstance(bound, Var):
            raise TypeMismatch("Abstraction must bind a variable")
        object.__setattr__(self, "bound", bound)
        object.__setattr__(self, "body", body)
        object.__setattr__(self, "ty", fun_type(bound.ty, body.ty))
        object.__setattr__(self, "_hash", hash(("l", bound._hash, body._hash)))
        object.__setattr__(self, "_cache", {})

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Abs)
            and self._hash == other._hash
            and self.bound == other.bound
            and self.body == other.body
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Abs({self.bound!r}, {self.body!r})"


TermExpr = Union[Var, Const, Comb, Abs]


class TermVariant(str, Enum):
    var = "Var"
    const = "Const"
    comb = "Comb"
    abs = "Abs"


def mk_term(variant: TermVariant | str, *parts, env=None) -> TermExpr:
    """
    Build a term of the given variant from its parts.

    Var and Const take (name, type); Comb takes (function, argument); Abs takes
    (bound variable, body). Constants are checked against `env` when given.
    """

    variant = TermVariant(variant)
    if variant == TermVariant.var:
        name, ty = parts
        return Var(name, ty)
    if variant == TermVariant.const:
        name, ty = parts
        if env is None:
            return Const(name, ty)
        return env.mk_const(name, ty)
    if variant == TermVariant.comb:
        fn, arg = parts
        return Comb(fn, arg)
    bound, body = parts
    return Abs(bound, body)


# structure

def strip_comb(tm: TermExpr) -> tuple[TermExpr, list[TermExpr]]:
    args = []
    while isinstance(tm, Comb):
        args.append(tm.arg)
        tm = tm.fn
    args.reverse()
    return tm, args


def list_mk_comb(fn: TermExpr, args: Iterable[TermExpr]) -> TermExpr:
    for arg in args:
        fn = Comb(fn, arg)
    return fn


def list_mk_abs(bounds: Iterable[Var], body: TermExpr) -> TermExpr:
    for bound in reversed(list(bounds)):
        body = Abs(bound, body)
    return body


def term_size(tm: TermExpr) -> int:
    if isinstance(tm, Comb):
        return 1 + term_size(tm.fn) + term_size(tm.arg)
    if isinstance(tm, Abs):
        return 1 + term_size(tm.body)
    return 1


# alpha-equivalence

def alpha_equal(a: TermExpr, b: TermExpr) -> bool:
    if a is b or a == b:
        return True
    return _aconv(a, b, [])


def _aconv(a, b, env: list[tuple[Var, Var]]) -> bool:
    if not env and a == b:
        return True
    if isinstance(a, Var):
        if not isinstance(b, Var):
            return False
        for x, y in reversed(env):
            if x == a or y == b:
                return x == a and y == b
        return a == b
    if isinstance(a, Const):
        return a == b
    if isinstance(a, Comb):
        return isinstance(b, Comb) and _aconv(a.fn, b.fn, env) and _aconv(a.arg, b.arg, env)
    if not isinstance(b, Abs) or a.bound.ty != b.bound.ty:
        return False
    env.append((a.bound, b.bound))
    try:
        return _aconv(a.body, b.body, env)
    finally:
        env.pop()


# free variables

def frees(tm: TermExpr) -> frozenset[Var]:
    cached = tm._cache.get("frees")
    if cached is not None:
        return cached
    if isinstance(tm, Var):
        result = frozenset((tm,))
    elif isinstance(tm, Const):
        result = frozenset()
    elif isinstance(tm, Comb):
        result = frees(tm.fn) | frees(tm.arg)
    else:
        result = frees(tm.body) - {tm.bound}
    tm._cache["frees"] = result
    return result


def free_in(v: Var, tm: TermExpr) -> bool:
    return v in frees(tm)


def frees_of_terms(tms: Iterable[TermExpr]) -> frozenset[Var]:
    result = frozenset()
    for tm in tms:
        result = result | frees(tm)
    return result


def type_vars_in_term(tm: TermExpr, acc: set[TyVar] | None = None) -> set[TyVar]:
    if acc is None:
        acc = set()
    if isinstance(tm, (Var, Const)):
        type_vars(tm.ty, acc)
    elif isinstance(tm, Comb):
        type_vars_in_term(tm.fn, acc)
        type_vars_in_term(tm.arg, acc)
    else:
        type_vars_in_term(tm.bound, acc)
        type_vars_in_term(tm.body, acc)
    return acc


def variant(avoid: Iterable[Var], v: Var) -> Var:
    taken = {(u.name, u.ty) for u in avoid}
    name = v.name
    while (name, v.ty) in taken:
        name = name + "'"
    if name == v.name:
        return v
    return Var(name, v.ty)


def variant_name(avoid_names: set[str], name: str) -> str:
    while name in avoid_names:
        name = name + "'"
    return name


# substitution

def vsubst(theta: dict[Var, TermExpr], tm: TermExpr) -> TermExpr:
    """Capture-avoiding simultaneous substitution of free variables."""

    for v, t in theta.items():
        if not isinstance(v, Var):
            raise TypeMismatch(f"Substitution target is not a variable: {v!r}")
        if v.ty != t.ty:
            raise TypeMismatch(f"Cannot substitute {t.ty!r} term for variable {v.name}:{v.ty!r}")
    theta = {v: t for v, t in theta.items() if v != t}
    if not theta:
        return tm
    return _vsubst(theta, tm)


def _vsubst(theta: dict[Var, TermExpr], tm: TermExpr) -> TermExpr:
    if isinstance(tm, Var):
        return theta.get(tm, tm)
    if isinstance(tm, Const):
        return tm
    if isinstance(tm, Comb):
        fn = _vsubst(theta, tm.fn)
        arg = _vsubst(theta, tm.arg)
        if fn is tm.fn and arg is tm.arg:
            return tm
        return Comb(fn, arg)

    bound, body = tm.bound, tm.body
    body_frees = frees(body)
    inner = {v: t for v, t in theta.items() if v != bound and v in body_frees}
    if not inner:
        return tm
    if any(bound in frees(t) for t in inner.values()):
        avoid = set(body_frees)
        for t in inner.values():
            avoid |= frees(t)
        new_bound = variant(avoid, bound)
        inner[bound] = new_bound
        return Abs(new_bound, _vsubst(inner, body))
    return Abs(bound, _vsubst(inner, body))


def inst_type(tyinst: dict[TyVar, TypeExpr], tm: TermExpr) -> TermExpr:
    """Instantiate type variables throughout a term, renaming binders to avoid capture."""

    if not tyinst:
        return tm
    return _inst_type(tyinst, {}, tm)


def _inst_type(tyinst, env: dict[Var, Var], tm):
    if isinstance(tm, Var):
        if tm in env:
            return env[tm]
        new_ty = type_subst(tyinst, tm.ty)
        return tm if new_ty is tm.ty else Var(tm.name, new_ty)
    if isinstance(tm, Const):
        new_ty = type_subst(tyinst, tm.ty)
        return tm if new_ty is tm.ty else Const(tm.name, new_ty)
    if isinstance(tm, Comb):
        fn = _inst_type(tyinst, env, tm.fn)
        arg = _inst_type(tyinst, env, tm.arg)
        if fn is tm.fn and arg is tm.arg:
            return tm
        return Comb(fn, arg)

    bound = tm.bound
    new_bound = Var(bound.name, type_subst(tyinst, bound.ty))
    images = set()
    for u in frees(tm.body):
        if u == bound:
            continue
        images.add(env[u] if u in env else Var(u.name, type_subst(tyinst, u.ty)))
    if new_bound in images:
        new_bound = variant(images, new_bound)
    inner = dict(env)
    inner[bound] = new_bound
    body = _inst_type(tyinst, inner, tm.body)
    if new_bound is bound and body is tm.body:
        return tm
    return Abs(new_bound, body)


# beta

def is_beta_redex(tm: TermExpr) -> bool:
    return isinstance(tm, Comb) and isinstance(tm.fn, Abs)


def bool_check(tm: TermExpr, what: str = "term") -> None:
    if tm.ty != BOOL:
        raise TypeMismatch(f"Expected a boolean {what}, got type {tm.ty!r}")


# primitive equality

def eq_const(ty: TypeExpr) -> Const:
    return Const("=", fun_type(ty, fun_type(ty, BOOL)))


def mk_eq(lhs: TermExpr, rhs: TermExpr) -> TermExpr:
    if lhs.ty != rhs.ty:
        raise TypeMismatch(f"Equation sides differ in type: {lhs.ty!r} vs {rhs.ty!r}")
    return Comb(Comb(eq_const(lhs.ty), lhs), rhs)


def is_eq(tm: TermExpr) -> bool:
    return (
        isinstance(tm, Comb)
        and isinstance(tm.fn, Comb)
        and isinstance(tm.fn.fn, Const)
        and tm.fn.fn.name == "="
    )


def dest_eq(tm: TermExpr) -> tuple[TermExpr, TermExpr]:
    if not is_eq(tm):
        raise NotAnEquation(f"Not an equation: {tm!r}")
    return tm.fn.arg, tm.arg
