"""
Generic-name normalization.

Machine-generated type variables (`?<digits>`) become t0, t1, ... and
machine-generated variables (`GEN%PVAR%<digits>`) become g0, g1, ..., numbered
by first occurrence in a left-to-right preorder walk of the printed tree.
Names already used in the term are skipped so no two names merge.
"""
import re

from tacticforge.kernel.terms import Abs, Comb, Const, TermExpr, Var, inst_type
from tacticforge.kernel.types import TyVar, TypeExpr


GENERIC_TYPE = re.compile(r"^\?\d+$")
GENERIC_VAR = re.compile(r"^GEN%PVAR%\d+$")


def _walk_type(ty: TypeExpr, type_names: list[str], seen_types: set[str]) -> None:
    if isinstance(ty, TyVar):
        if ty.name not in seen_types:
            seen_types.add(ty.name)
            type_names.append(ty.name)
        return
    for arg in ty.args:
        _walk_type(arg, type_names, seen_types)


def _walk_term(tm, type_names, seen_types, var_names, seen_vars) -> None:
    if isinstance(tm, (Var, Const)):
        _walk_type(tm.ty, type_names, seen_types)
        if isinstance(tm, Var) and tm.name not in seen_vars:
            seen_vars.add(tm.name)
            var_names.append(tm.name)
    elif isinstance(tm, Comb):
        _walk_term(tm.fn, type_names, seen_types, var_names, seen_vars)
        _walk_term(tm.arg, type_names, seen_types, var_names, seen_vars)
    else:
        _walk_term(tm.bound, type_names, seen_types, var_names, seen_vars)
        _walk_term(tm.body, type_names, seen_types, var_names, seen_vars)


def _fresh_names(originals: list[str], pattern: re.Pattern, prefix: str) -> dict[str, str]:
    taken = {name for name in originals if not pattern.match(name)}
    mapping = {}
    counter = 0
    for name in originals:
        if not pattern.match(name):
            continue
        while f"{prefix}{counter}" in taken:
            counter += 1
        mapping[name] = f"{prefix}{counter}"
        taken.add(mapping[name])
        counter += 1
    return mapping


def generic_name_maps(tm: TermExpr) -> tuple[dict[str, str], dict[str, str]]:
    type_names: list[str] = []
    var_names: list[str] = []
    _walk_term(tm, type_names, set(), var_names, set())
    return (
        _fresh_names(type_names, GENERIC_TYPE, "t"),
        _fresh_names(var_names, GENERIC_VAR, "g"),
    )


def _rename_vars(tm, mapping: dict[str, str]):
    if isinstance(tm, Var):
        new_name = mapping.get(tm.name)
        return tm if new_name is None else Var(new_name, tm.ty)
    if isinstance(tm, Const):
        return tm
    if isinstance(tm, Comb):
        fn = _rename_vars(tm.fn, mapping)
        arg = _rename_vars(tm.arg, mapping)
        return tm if (fn is tm.fn and arg is tm.arg) else Comb(fn, arg)
    bound = _rename_vars(tm.bound, mapping)
    body = _rename_vars(tm.body, mapping)
    return tm if (bound is tm.bound and body is tm.body) else Abs(bound, body)


def normalize(tm: TermExpr) -> TermExpr:
    cached = tm._cache.get("normalized")
    if cached is not None:
        return cached

    type_map, var_map = generic_name_maps(tm)
    result = tm
    if type_map:
        result = inst_type({TyVar(old): TyVar(new) for old, new in type_map.items()}, result)
    if var_map:
        result = _rename_vars(result, var_map)

    tm._cache["normalized"] = result
    return result
