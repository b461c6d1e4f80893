import logging

from tacticforge.errors import IllTypedTerm, KernelError, NestingTooDeep, SExprError, UnknownTag
from tacticforge.kernel.terms import Abs, Comb, Const, TermExpr, Var
from tacticforge.kernel.types import TyApp, TyVar, TypeExpr
from tacticforge.sexpr.sexpr import Atom, SExpr, SList, is_valid_token, parse, print_sexpr


logger = logging.getLogger(__name__)


TERM_TAGS = ("a", "l", "v", "c")


def encode_type(ty: TypeExpr) -> SExpr:
    if isinstance(ty, TyVar):
        return Atom(ty.name)
    if not ty.args:
        return Atom(ty.operator)
    if ty.operator == "fun" and len(ty.args) == 2:
        return SList([Atom("fun"), SList([encode_type(ty.args[0])]), encode_type(ty.args[1])])
    return SList([Atom(ty.operator)] + [encode_type(arg) for arg in ty.args])


def encode_term(tm: TermExpr) -> SExpr:
    if isinstance(tm, Var):
        return SList([Atom("v"), encode_type(tm.ty), Atom(tm.name)])
    if isinstance(tm, Const):
        return SList([Atom("c"), encode_type(tm.ty), Atom(tm.name)])
    if isinstance(tm, Comb):
        return SList([Atom("a"), encode_term(tm.fn), encode_term(tm.arg)])
    return SList([Atom("l"), encode_term(tm.bound), encode_term(tm.body)])


def decode_type(sexpr: SExpr, env) -> TypeExpr:
    if isinstance(sexpr, Atom):
        if env is not None and env.type_arity(sexpr.token) == 0:
            return TyApp(sexpr.token)
        if env is None and sexpr.token in ("bool", "ind"):
            return TyApp(sexpr.token)
        return TyVar(sexpr.token)

    if len(sexpr) == 0 or not isinstance(sexpr[0], Atom):
        raise UnknownTag(f"Malformed type expression: {print_sexpr(sexpr)}")

    operator = sexpr[0].token
    children = list(sexpr.children[1:])
    if operator == "fun" and len(children) == 2:
        domain = children[0]
        if isinstance(domain, SList) and len(domain) == 1:
            domain = domain[0]
        args = (decode_type(domain, env), decode_type(children[1], env))
    else:
        args = tuple(decode_type(child, env) for child in children)

    if env is not None:
        try:
            env.check_type_operator(operator, len(args))
        except KernelError as e:
            raise IllTypedTerm(str(e)) from e

    return TyApp(operator, args)


def decode_term(sexpr: SExpr, env) -> TermExpr:
    if isinstance(sexpr, Atom) or len(sexpr) == 0 or not isinstance(sexpr[0], Atom):
        raise UnknownTag(f"Expected a tagged term, got {print_sexpr(sexpr)}")

    tag = sexpr[0].token
    if tag not in TERM_TAGS:
        raise UnknownTag(f"Unknown term tag {tag!r}")
    if len(sexpr) != 3:
        raise UnknownTag(f"Tag {tag!r} expects two children, got {len(sexpr) - 1}")

    try:
        if tag in ("v", "c"):
            name_node = sexpr[2]
            if not isinstance(name_node, Atom):
                raise UnknownTag(f"Expected a name atom in {print_sexpr(sexpr)}")
            ty = decode_type(sexpr[1], env)
            if tag == "v":
                return Var(name_node.token, ty)
            if env is None:
                return Const(name_node.token, ty)
            return env.mk_const(name_node.token, ty)
        if tag == "a":
            return Comb(decode_term(sexpr[1], env), decode_term(sexpr[2], env))
        bound = decode_term(sexpr[1], env)
        if not isinstance(bound, Var):
            raise IllTypedTerm("Abstraction must bind a variable")
        return Abs(bound, decode_term(sexpr[2], env))
    except KernelError as e:
        raise IllTypedTerm(str(e)) from e


def print_term(tm: TermExpr) -> str:
    cached = tm._cache.get("print")
    if cached is None:
        cached = print_sexpr(encode_term(tm))
        tm._cache["print"] = cached
    return cached


def parse_term(text: bytes | str, env) -> TermExpr:
    try:
        return decode_term(parse(text), env)
    except RecursionError as e:
        raise NestingTooDeep("term nested too deeply to decode") from e


def print_type(ty: TypeExpr) -> str:
    return print_sexpr(encode_type(ty))


def parse_type(text: bytes | str, env) -> TypeExpr:
    try:
        return decode_type(parse(text), env)
    except RecursionError as e:
        raise NestingTooDeep("type nested too deeply to decode") from e


def alpha_key(tm: TermExpr) -> str:
    """
    Canonical print with bound variables named by binding depth (`%0`, `%1`, ...).
    Two terms are alpha-equal exactly when their keys are equal.
    """

    cached = tm._cache.get("alpha_key")
    if cached is None:
        parts: list[str] = []
        _alpha_print(tm, {}, 0, parts)
        cached = "".join(parts)
        tm._cache["alpha_key"] = cached
    return cached


def _type_text(ty: TypeExpr) -> str:
    return print_sexpr(encode_type(ty))


def _alpha_print(tm, bound: dict, depth: int, parts: list[str]) -> None:
    if isinstance(tm, Var):
        level = bound.get(tm)
        name = tm.name if level is None else f"%{level}"
        parts.append(f"(v {_type_text(tm.ty)} {name})")
    elif isinstance(tm, Const):
        parts.append(f"(c {_type_text(tm.ty)} {tm.name})")
    elif isinstance(tm, Comb):
        parts.append("(a ")
        _alpha_print(tm.fn, bound, depth, parts)
        parts.append(" ")
        _alpha_print(tm.arg, bound, depth, parts)
        parts.append(")")
    else:
        inner = dict(bound)
        inner[tm.bound] = depth
        parts.append(f"(l (v {_type_text(tm.bound.ty)} %{depth}) ")
        _alpha_print(tm.body, inner, depth + 1, parts)
        parts.append(")")


def check_name(name: str) -> None:
    if not is_valid_token(name) or name.startswith("%"):
        raise SExprError(f"Invalid name token: {name!r}")
