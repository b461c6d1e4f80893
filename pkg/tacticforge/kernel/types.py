"""
Simple types of the logic: type variables and applied type operators.

Values are immutable and hash-consed by structure, so they can be shared freely
between threads and used as dictionary keys.
"""
from typing import Union

from tacticforge.errors import TypeMismatch


class TyVar:

    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("tyvar", name)))

    def __setattr__(self, key, value):
        raise AttributeError("TyVar is immutable")

    def __eq__(self, other):
        return self is other or (isinstance(other, TyVar) and other.name == self.name)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"TyVar({self.name!r})"


class TyApp:

    __slots__ = ("operator", "args", "_hash")

    def __init__(self, operator: str, args: tuple["TypeExpr", ...] = ()):
        args = tuple(args)
        object.__setattr__(self, "operator", operator)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_hash", hash(("tyapp", operator, args)))

    def __setattr__(self, key, value):
        raise AttributeError("TyApp is immutable")

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, TyApp)
            and self._hash == other._hash
            and self.operator == other.operator
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.args:
            return f"TyApp({self.operator!r})"
        return f"TyApp({self.operator!r}, {self.args!r})"


TypeExpr = Union[TyVar, TyApp]


BOOL = TyApp("bool")
ALPHA = TyVar("A")


def fun_type(domain: TypeExpr, codomain: TypeExpr) -> TyApp:
    return TyApp("fun", (domain, codomain))


def is_fun_type(ty: TypeExpr) -> bool:
    return isinstance(ty, TyApp) and ty.operator == "fun" and len(ty.args) == 2


def type_vars(ty: TypeExpr, acc: set[TyVar] | None = None) -> set[TyVar]:
    if acc is None:
        acc = set()
    if isinstance(ty, TyVar):
        acc.add(ty)
    else:
        for arg in ty.args:
            type_vars(arg, acc)
    return acc


def type_subst(inst: dict[TyVar, TypeExpr], ty: TypeExpr) -> TypeExpr:
    if not inst:
        return ty
    if isinstance(ty, TyVar):
        return inst.get(ty, ty)
    if not ty.args:
        return ty
    new_args = tuple(type_subst(inst, arg) for arg in ty.args)
    if all(a is b for a, b in zip(new_args, ty.args)):
        return ty
    return TyApp(ty.operator, new_args)


def type_match(
        pattern: TypeExpr,
        ty: TypeExpr,
        inst: dict[TyVar, TypeExpr],
) -> dict[TyVar, TypeExpr]:
    """
    Extend `inst` so that pattern instantiated by it equals `ty`.
    Raises TypeMismatch when no such extension exists.
    """

    if isinstance(pattern, TyVar):
        bound = inst.get(pattern)
        if bound is None:
            inst[pattern] = ty
        elif bound != ty:
            raise TypeMismatch(f"Type variable {pattern.name} bound to {bound!r}, cannot match {ty!r}")
        return inst

    if not isinstance(ty, TyApp) or ty.operator != pattern.operator or len(ty.args) != len(pattern.args):
        raise TypeMismatch(f"Type {ty!r} is not an instance of {pattern!r}")

    for sub_pattern, sub_ty in zip(pattern.args, ty.args):
        type_match(sub_pattern, sub_ty, inst)

    return inst
