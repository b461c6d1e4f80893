"""
The theory signature: type operators, constants with their generic types,
axioms and definitions.
"""
import hashlib
import logging

from tacticforge.errors import (
    ArityError,
    FreeVariablesInDefinition,
    Redefinition,
    TypeMismatch,
    UnknownConstant,
)
from tacticforge.kernel.terms import Abs, Comb, Const, TermExpr, Var, bool_check, frees, mk_eq
from tacticforge.kernel.theorem import Provenance, Theorem, _sealed_theorem
from tacticforge.kernel.types import ALPHA, BOOL, TyVar, TypeExpr, fun_type, type_match
from tacticforge.sexpr.codec import check_name, print_term, print_type


logger = logging.getLogger(__name__)


class Environment:

    def __init__(self):
        self.type_operators: dict[str, int] = {"bool": 0, "fun": 2}
        self.constants: dict[str, TypeExpr] = {
            "=": fun_type(ALPHA, fun_type(ALPHA, BOOL)),
        }
        self.axioms: dict[str, Theorem] = {}
        self.definitions: dict[str, tuple[TermExpr, Theorem]] = {}

    # signature

    def type_arity(self, name: str) -> int | None:
        return self.type_operators.get(name)

    def check_type_operator(self, operator: str, n_args: int) -> None:
        arity = self.type_operators.get(operator)
        if arity is None:
            raise UnknownConstant(f"Unknown type operator: {operator}")
        if arity != n_args:
            raise ArityError(f"Type operator {operator} takes {arity} arguments, got {n_args}")

    def check_type(self, ty: TypeExpr) -> None:
        if isinstance(ty, TyVar):
            return
        self.check_type_operator(ty.operator, len(ty.args))
        for arg in ty.args:
            self.check_type(arg)

    def new_type(self, name: str, arity: int) -> None:
        check_name(name)
        if name in self.type_operators:
            raise Redefinition(f"Type operator {name} already defined")
        self.type_operators[name] = arity
        logger.debug(f"New type operator {name}/{arity}")

    def new_constant(self, name: str, ty: TypeExpr) -> None:
        check_name(name)
        if name in self.constants:
            raise Redefinition(f"Constant {name} already defined")
        self.check_type(ty)
        self.constants[name] = ty
        logger.debug(f"New constant {name} : {print_type(ty)}")

    def generic_type(self, name: str) -> TypeExpr:
        try:
            return self.constants[name]
        except KeyError:
            raise UnknownConstant(f"Unknown constant: {name}")

    def mk_const(self, name: str, ty: TypeExpr | None = None) -> Const:
        """
        Build a constant at type `ty`, which must be an instance of the
        constant's generic type. Without `ty` the generic type is used.
        """

        generic = self.generic_type(name)
        if ty is None:
            return Const(name, generic)
        self.check_type(ty)
        try:
            type_match(generic, ty, {})
        except TypeMismatch:
            raise TypeMismatch(
                f"{print_type(ty)} is not an instance of the type {print_type(generic)} of {name}"
            )
        return Const(name, ty)

    def check_term(self, tm: TermExpr) -> None:
        """Raise when a term mentions constants or type operators outside this signature."""

        if isinstance(tm, Var):
            self.check_type(tm.ty)
        elif isinstance(tm, Const):
            self.mk_const(tm.name, tm.ty)
        elif isinstance(tm, Comb):
            self.check_term(tm.fn)
            self.check_term(tm.arg)
        elif isinstance(tm, Abs):
            self.check_term(tm.bound)
            self.check_term(tm.body)

    # theories

    def new_axiom(self, name: str, tm: TermExpr) -> Theorem:
        if name in self.axioms:
            raise Redefinition(f"Axiom {name} already asserted")
        bool_check(tm, "axiom")
        self.check_term(tm)
        th = _sealed_theorem((), tm, Provenance.axiom)
        self.axioms[name] = th
        logger.debug(f"New axiom {name}: {print_term(tm)}")
        return th

    def define(self, name: str, body: TermExpr) -> tuple["Environment", Theorem]:
        """
        Introduce constant `name` equal to the closed term `body`.

        Returns:
            this environment and the definitional theorem |- name = body
        """

        if name in self.constants or name in self.definitions:
            raise Redefinition(f"Constant {name} already defined")
        free = frees(body)
        if free:
            names = ", ".join(sorted(v.name for v in free))
            raise FreeVariablesInDefinition(f"Definition of {name} has free variables: {names}")
        self.check_term(body)

        self.new_constant(name, body.ty)
        th = _sealed_theorem((), mk_eq(Const(name, body.ty), body), Provenance.definition)
        self.definitions[name] = (body, th)
        logger.debug(f"Defined {name}")
        return self, th

    def definition(self, name: str) -> Theorem:
        try:
            return self.definitions[name][1]
        except KeyError:
            raise UnknownConstant(f"No definition for {name}")

    def axiom(self, name: str) -> Theorem:
        try:
            return self.axioms[name]
        except KeyError:
            raise UnknownConstant(f"No axiom named {name}")

    def trusted_import(self, hyps, conclusion: TermExpr) -> Theorem:
        """Seal a statement supplied from outside the kernel, e.g. a registered library theorem."""

        for tm in list(hyps) + [conclusion]:
            self.check_term(tm)
        return _sealed_theorem(hyps, conclusion, Provenance.imported)

    def restore(self, hyps, conclusion: TermExpr, provenance: Provenance) -> Theorem:
        """
        Re-seal a statement saved from a registry of this kernel with the
        provenance it was saved under. Only checksummed snapshots come through here.
        """

        for tm in list(hyps) + [conclusion]:
            self.check_term(tm)
        return _sealed_theorem(hyps, conclusion, Provenance(provenance))

    def signature(self) -> str:
        """Hex digest identifying the type operators and constants of this environment."""

        hasher = hashlib.sha256()
        for name in sorted(self.type_operators):
            hasher.update(f"type\t{name}\t{self.type_operators[name]}\n".encode("utf-8"))
        for name in sorted(self.constants):
            hasher.update(f"const\t{name}\t{print_type(self.constants[name])}\n".encode("utf-8"))
        return hasher.hexdigest()

    def copy(self) -> "Environment":
        other = Environment()
        other.type_operators = dict(self.type_operators)
        other.constants = dict(self.constants)
        other.axioms = dict(self.axioms)
        other.definitions = dict(self.definitions)
        return other

