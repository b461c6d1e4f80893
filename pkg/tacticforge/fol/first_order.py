"""
First-order terms, literals and clauses, and the translation between them and
higher-order terms.

Function and predicate symbols are keyed by the higher-order head they stand
for, including its type and the number of arguments it is applied to, so two
uses of a polymorphic constant at different types never unify. Lambda
abstractions that mention no quantified variable are frozen into opaque
constants named `_lam<fingerprint>`.
"""
from typing import NamedTuple, Union

from tacticforge.errors import NotFirstOrderizable
from tacticforge.kernel.terms import Abs, Const, TermExpr, Var, frees, list_mk_comb, strip_comb
from tacticforge.kernel.types import TypeExpr
from tacticforge.sexpr.codec import alpha_key, print_type
from tacticforge.sexpr.fingerprint import term_fingerprint


class FOVar:

    __slots__ = ("name", "ty", "_hash")

    def __init__(self, name: str, ty: TypeExpr):
        self.name = name
        self.ty = ty
        self._hash = hash(("fovar", name))

    def __eq__(self, other):
        return isinstance(other, FOVar) and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return self.name


class FOApp:

    __slots__ = ("symbol", "args", "ty", "_hash")

    def __init__(self, symbol: str, args: tuple = (), ty: TypeExpr | None = None):
        self.symbol = symbol
        self.args = tuple(args)
        self.ty = ty
        self._hash = hash(("foapp", symbol, self.args))

    def __eq__(self, other):
        return (
            isinstance(other, FOApp)
            and self._hash == other._hash
            and other.symbol == self.symbol
            and other.args == self.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.args:
            return self.symbol
        return f"{self.symbol}({', '.join(repr(a) for a in self.args)})"


FOTerm = Union[FOVar, FOApp]


class Literal(NamedTuple):
    positive: bool
    atom: FOApp

    def negate(self) -> "Literal":
        return Literal(not self.positive, self.atom)

    def __repr__(self):
        return repr(self.atom) if self.positive else f"~{self.atom!r}"


class Clause(NamedTuple):
    literals: tuple[Literal, ...]
    source: int

    def is_positive(self) -> bool:
        return all(lit.positive for lit in self.literals)

    def variables(self) -> set[FOVar]:
        found: set[FOVar] = set()
        for lit in self.literals:
            term_variables(lit.atom, found)
        return found

    def __repr__(self):
        return "{" + ", ".join(repr(lit) for lit in self.literals) + "}"


def term_variables(term: FOTerm, acc: set[FOVar] | None = None) -> set[FOVar]:
    if acc is None:
        acc = set()
    if isinstance(term, FOVar):
        acc.add(term)
    else:
        for arg in term.args:
            term_variables(arg, acc)
    return acc


def is_ground(term: FOTerm) -> bool:
    if isinstance(term, FOVar):
        return False
    return all(is_ground(arg) for arg in term.args)


SKOLEM_PREFIX = "_sk"
LAMBDA_PREFIX = "_lam"
ANY_PREFIX = "_any"


class Signature:
    """Symbol table shared by clausification and proof reconstruction."""

    def __init__(self):
        self.heads: dict[str, TermExpr] = {}
        self.skolem_count = 0
        self._defaults: dict[str, Var] = {}

    def symbol(self, head: TermExpr, arity: int) -> str:
        if isinstance(head, Abs):
            name = f"{LAMBDA_PREFIX}{term_fingerprint(head)}/{arity}"
        else:
            name = f"{alpha_key(head)}/{arity}"
        self.heads.setdefault(name, head)
        return name

    def new_skolem(self) -> str:
        name = f"{SKOLEM_PREFIX}{self.skolem_count}"
        self.skolem_count += 1
        return name

    def default_term(self, ty: TypeExpr) -> FOApp:
        """An arbitrary ground term of the given type, for variables a proof leaves unbound."""

        name = f"{ANY_PREFIX}:{print_type(ty)}"
        if name not in self._defaults:
            self._defaults[name] = Var(f"{ANY_PREFIX}{len(self._defaults)}", ty)
        return FOApp(name, (), ty)

    def default_var(self, symbol: str) -> Var | None:
        return self._defaults.get(symbol)


def to_first_order(tm: TermExpr, env: dict[Var, FOTerm], signature: Signature) -> FOTerm:
    head, args = strip_comb(tm)
    if isinstance(head, Var) and head in env:
        if args:
            raise NotFirstOrderizable(f"quantified variable {head.name} is applied to arguments")
        return env[head]
    if isinstance(head, Abs) and any(v in env for v in frees(head)):
        raise NotFirstOrderizable("lambda abstraction mentions a quantified variable")
    if not isinstance(head, (Const, Var, Abs)):
        raise NotFirstOrderizable(f"unexpected head {head!r}")
    symbol = signature.symbol(head, len(args))
    return FOApp(symbol, tuple(to_first_order(arg, env, signature) for arg in args), tm.ty)


class MissingWitness(Exception):
    """A ground term mentions a Skolem term with no witness on the current branch."""


def to_higher_order(
        term: FOTerm,
        signature: Signature,
        witnesses: dict[FOApp, Var],
) -> TermExpr:
    if isinstance(term, FOVar):
        raise NotFirstOrderizable(f"cannot translate non-ground term containing {term.name}")
    if term.symbol.startswith(SKOLEM_PREFIX):
        witness = witnesses.get(term)
        if witness is None:
            raise MissingWitness(repr(term))
        return witness
    default = signature.default_var(term.symbol)
    if default is not None:
        return default
    head = signature.heads[term.symbol]
    return list_mk_comb(head, [to_higher_order(arg, signature, witnesses) for arg in term.args])
