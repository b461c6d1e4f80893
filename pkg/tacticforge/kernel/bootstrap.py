"""
The boolean theory every environment starts from.

Equality is the only primitive constant. Truth, the connectives and the
quantifiers are defined on top of it, and excluded middle is asserted as the
single classical axiom.
"""
import logging

from functools import cache

from tacticforge.kernel.environment import Environment
from tacticforge.kernel.syntax import FALSE, TRUE, mk_conj, mk_disj, mk_forall, mk_imp, mk_neg
from tacticforge.kernel.terms import Abs, Comb, Var, list_mk_abs, list_mk_comb, mk_eq
from tacticforge.kernel.types import ALPHA, BOOL, fun_type


logger = logging.getLogger(__name__)


EXCLUDED_MIDDLE = "EXCLUDED_MIDDLE"


def _define_bool(env: Environment) -> None:
    p = Var("p", BOOL)
    q = Var("q", BOOL)
    r = Var("r", BOOL)

    identity = Abs(p, p)
    env.define("T", mk_eq(identity, identity))

    f = Var("f", fun_type(BOOL, fun_type(BOOL, BOOL)))
    env.define("/\\", list_mk_abs(
        [p, q],
        mk_eq(Abs(f, list_mk_comb(f, [p, q])), Abs(f, list_mk_comb(f, [TRUE, TRUE]))),
    ))

    env.define("==>", list_mk_abs([p, q], mk_eq(mk_conj(p, q), p)))

    big_p = Var("P", fun_type(ALPHA, BOOL))
    x = Var("x", ALPHA)
    env.define("!", Abs(big_p, mk_eq(big_p, Abs(x, TRUE))))

    env.define("?", Abs(big_p, mk_forall(q, mk_imp(
        mk_forall(x, mk_imp(Comb(big_p, x), q)),
        q,
    ))))

    env.define("\\/", list_mk_abs([p, q], mk_forall(r, mk_imp(
        mk_imp(p, r),
        mk_imp(mk_imp(q, r), r),
    ))))

    env.define("F", mk_forall(p, p))
    env.define("~", Abs(p, mk_imp(p, FALSE)))


    t = Var("t", BOOL)
    env.new_axiom(EXCLUDED_MIDDLE, mk_forall(t, mk_disj(t, mk_neg(t))))


@cache
def bool_environment() -> Environment:
    env = Environment()
    _define_bool(env)
    logger.debug(f"Boolean theory ready with {len(env.definitions)} definitions")
    return env


def new_environment() -> Environment:
    """A fresh environment containing the boolean theory."""

    return bool_environment().copy()
