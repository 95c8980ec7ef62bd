"""Algebraic models and the full extension map, including dynamic modalities."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .algebra import AlgebraAction, FiniteHAO, ProductAlgebra, QuotientAlgebra
from .syntax import (
    ActionEnv, ActionStructure, And, Atom, Bot, Box, Dia, DynBox, DynDia, Formula, Imp, Or,
)

VALIDITY_CAP = 10**7


class EvaluationError(ValueError):
    pass


class ResourceBoundError(RuntimeError):
    pass


@dataclass(eq=False)
class AlgebraicModel:
    algebra: FiniteHAO
    valuation: Mapping[str, object]

    def _cache(self, env: ActionEnv):
        caches = self.__dict__.setdefault("_caches", {})
        c = caches.get(id(env))
        if c is None or c[0] is not env:
            c = caches[id(env)] = (env, {}, {})
        return c


@dataclass(eq=False)
class UpdatedAlgebraicModel(AlgebraicModel):
    base: AlgebraicModel = None
    action: AlgebraAction = None
    product: ProductAlgebra = None
    quotient: QuotientAlgebra = None

    def pi(self, f):
        return self.quotient.project(f)

    def pi_k(self, f, state: str):
        return self.product.coord(f, state)

    def i_prime(self, c):
        return self.quotient.i_prime(c)


def induced_action(alpha: ActionStructure, model: AlgebraicModel, env: ActionEnv) -> AlgebraAction:
    """Same states and relations; each precondition replaced by its extension in ``model``."""
    pre = {k: _eval(model, env, alpha.pre[k]) for k in alpha.states}
    return AlgebraAction(alpha.states, alpha.designated, alpha.rel, pre, alpha.name)


def update_algebraic_model(model: AlgebraicModel, alpha: ActionStructure, env: ActionEnv) -> UpdatedAlgebraicModel:
    """Product followed by quotient. Memoized per action name: shifts share one update."""
    _, _, updates = model._cache(env)
    hit = updates.get(alpha.name)
    if hit is not None:
        return hit
    act = induced_action(alpha, model, env)
    prod = ProductAlgebra(model.algebra, act)
    quot = QuotientAlgebra(prod)
    val = {p: quot.project(prod.const(x)) for p, x in model.valuation.items()}
    out = UpdatedAlgebraicModel(quot, val, model, act, prod, quot)
    updates[alpha.name] = out
    return out


def _eval(model: AlgebraicModel, env: ActionEnv, phi: Formula):
    _, ext, _ = model._cache(env)
    hit = ext.get(phi)
    if hit is not None:
        return hit
    A = model.algebra
    if isinstance(phi, Atom):
        try:
            out = model.valuation[phi.name]
        except KeyError:
            raise EvaluationError(f"atom {phi.name!r} has no valuation") from None
    elif isinstance(phi, Bot):
        out = A.bot
    elif isinstance(phi, And):
        out = A.meet(_eval(model, env, phi.left), _eval(model, env, phi.right))
    elif isinstance(phi, Or):
        out = A.join(_eval(model, env, phi.left), _eval(model, env, phi.right))
    elif isinstance(phi, Imp):
        out = A.imp(_eval(model, env, phi.left), _eval(model, env, phi.right))
    elif isinstance(phi, Dia):
        out = A.dia(phi.agent, _eval(model, env, phi.body))
    elif isinstance(phi, Box):
        out = A.box(phi.agent, _eval(model, env, phi.body))
    elif isinstance(phi, (DynDia, DynBox)):
        alpha = env[phi.action.name]
        k = env.point(phi.action)
        upd = update_algebraic_model(model, alpha, env)
        inner = upd.pi_k(upd.i_prime(_eval(upd, env, phi.body)), k)
        pre = upd.action.pre[k]
        out = A.meet(pre, inner) if isinstance(phi, DynDia) else A.imp(pre, inner)
    else:
        raise TypeError(f"not a formula: {phi!r}")
    ext[phi] = out
    return out


def eval_algebraic(model: AlgebraicModel, env: ActionEnv, phi: Formula):
    return _eval(model, env, phi)


def countervaluation(alg: FiniteHAO, env: ActionEnv, phi: Formula, cap: int = VALIDITY_CAP):
    """First valuation refuting phi, or None."""
    names = sorted(env.all_atoms(phi))
    els = list(alg.elements)
    if len(els) ** len(names) > cap:
        raise ResourceBoundError(f"{len(els)}^{len(names)} valuations exceed the cap of {cap}")
    for vals in itertools.product(els, repeat=len(names)):
        m = AlgebraicModel(alg, dict(zip(names, vals)))
        if _eval(m, env, phi) != alg.top:
            return dict(zip(names, vals))
    return None


def validity(alg: FiniteHAO, env: ActionEnv, phi: Formula, cap: int = VALIDITY_CAP) -> bool:
    """True iff phi evaluates to top under every valuation of its atoms (preconditions included)."""
    return countervaluation(alg, env, phi, cap) is None
