"""Reduction-axiom normalizer and a bounded-model equivalence oracle."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .relational import extension_mask
from .syntax import (
    BINARY, BOT, DYNAMIC, MODAL, TOP, ActionEnv, And, Atom, Bot, Box, Dia, DynBox, DynDia, Formula,
    Imp, Or, action_names, agents_of, big_and, big_or, children, dynamic_depth, neg, size, subformulas, with_children,
)

MAX_STEPS = 10**4


class RewriteError(RuntimeError):
    pass


@dataclass(frozen=True)
class Step:
    axiom: str
    path: tuple[int, ...]
    before: Formula
    after: Formula

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "path": list(self.path), "before": str(self.before), "after": str(self.after)}


@dataclass
class RewriteTrace:
    start: Formula
    steps: list[Step] = field(default_factory=list)

    def replay(self) -> Formula:
        phi = self.start
        for s in self.steps:
            if subterm(phi, s.path) != s.before:
                raise RewriteError(f"trace does not match at {s.path}")
            phi = replace_at(phi, s.path, s.after)
        return phi

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self.steps]


def subterm(phi: Formula, path: tuple[int, ...]) -> Formula:
    for i in path:
        phi = children(phi)[i]
    return phi


def replace_at(phi: Formula, path: tuple[int, ...], new: Formula) -> Formula:
    if not path:
        return new
    kids = list(children(phi))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(phi, tuple(kids))


def find_redex(phi: Formula, rightmost: bool = False) -> tuple[int, ...] | None:
    """Path to the leftmost (or rightmost) dynamic node whose argument is static."""

    def go(f):
        if isinstance(f, BINARY):
            order = (1, 0) if rightmost else (0, 1)
            kids = (f.left, f.right)
            statics = []
            for i in order:
                p, s = go(kids[i])
                if p is not None:
                    return (i,) + p, False
                statics.append(s)
            return None, all(statics)
        if isinstance(f, MODAL):
            p, s = go(f.body)
            return (None, s) if p is None else ((0,) + p, False)
        if isinstance(f, DYNAMIC):
            p, s = go(f.body)
            if p is not None:
                return (0,) + p, False
            return (), False
        return None, True

    return go(phi)[0]


def apply_axiom(redex: Formula, env: ActionEnv) -> tuple[str, Formula]:
    """Rewrite one dynamic node over a static argument by its reduction axiom."""
    ref, body = redex.action, redex.body
    pre = env.pre(ref)
    dia = isinstance(redex, DynDia)
    act = env[ref.name]
    k = env.point(ref)
    if body == TOP:
        return ("dia-top", pre) if dia else ("box-top", TOP)
    if isinstance(body, Bot):
        return ("dia-bot", BOT) if dia else ("box-bot", neg(pre))
    if isinstance(body, Atom):
        return ("dia-atom", And(pre, body)) if dia else ("box-atom", Imp(pre, body))
    if isinstance(body, Or):
        split = Or(DynDia(ref, body.left), DynDia(ref, body.right))
        return ("dia-or", split) if dia else ("box-or", Imp(pre, split))
    if isinstance(body, And):
        cls = DynDia if dia else DynBox
        return ("dia-and" if dia else "box-and"), And(cls(ref, body.left), cls(ref, body.right))
    if isinstance(body, Imp):
        core = Imp(DynDia(ref, body.left), DynDia(ref, body.right))
        return ("dia-imp", And(pre, core)) if dia else ("box-imp", core)
    if isinstance(body, (Dia, Box)):
        agent = body.agent
        succ = act.successors(agent, k)
        if isinstance(body, Dia):
            inner = big_or(Dia(agent, DynDia(env.ref(ref.name, j), body.body)) for j in succ)
        else:
            inner = big_and(Box(agent, DynBox(env.ref(ref.name, j), body.body)) for j in succ)
        name = ("dia-" if dia else "box-") + ("dia" if isinstance(body, Dia) else "box")
        return name, (And(pre, inner) if dia else Imp(pre, inner))
    raise RewriteError(f"no reduction axiom for argument {body!r}")


def reduce_step(phi: Formula, env: ActionEnv, rightmost: bool = False) -> tuple[Formula, Step] | None:
    path = find_redex(phi, rightmost)
    if path is None:
        return None
    redex = subterm(phi, path)
    axiom, new = apply_axiom(redex, env)
    return replace_at(phi, path, new), Step(axiom, path, redex, new)


def normalize(phi: Formula, env: ActionEnv, max_steps: int = MAX_STEPS,
              rightmost: bool = False) -> tuple[Formula, RewriteTrace]:
    trace = RewriteTrace(phi)
    cur = phi
    while True:
        res = reduce_step(cur, env, rightmost)
        if res is None:
            return cur, trace
        if len(trace.steps) >= max_steps:
            raise RewriteError(f"no normal form within {max_steps} steps")
        cur, step = res
        trace.steps.append(step)


def termination_measure(phi: Formula) -> list[tuple[int, int]]:
    """Multiset of (dynamic depth, body size) over dynamic nodes; body size only counts at depth 1.

    With static preconditions every innermost step lowers this in the
    multiset extension of the lexicographic order. Counting dynamic depths
    alone is not enough: the or/and axioms turn one depth-1 node into two.
    """
    out = []
    for f in subformulas(phi):
        if isinstance(f, DYNAMIC):
            d = dynamic_depth(f)
            out.append((d, size(f.body) if d == 1 else 0))
    return sorted(out, reverse=True)


def multiset_less(a: list, b: list) -> bool:
    """Dershowitz-Manna order on finite multisets of totally ordered items."""
    ca, cb = Counter(a), Counter(b)
    if ca == cb:
        return False
    diff_a = ca - cb
    diff_b = cb - ca
    return all(any(y > x for y in diff_b) for x in diff_a)


def size_bound(phi: Formula, env: ActionEnv) -> int:
    """Upper bound on the size of the normal form of ``phi``.

    Under one action each agent modality can fan out into one copy per
    successor, so the factor is K ** (modal depth), not K ** (dynamic
    nesting); every node may also carry a copy of a precondition. Here K is
    the largest successor set (at least 1) and P the largest bound on a
    normalized precondition.
    """
    memo: dict[str, tuple[int, int, int]] = {}

    def pre_bound(name: str) -> tuple[int, int, int]:
        if name not in memo:
            act = env[name]
            sb = [go(f) for f in act.pre.values()]
            fan = max((len(act.successors(a, k)) for a in act.rel for k in act.states), default=1)
            memo[name] = (max(b for b, _ in sb), max(m for _, m in sb), max(fan, 1))
        return memo[name]

    def go(f: Formula) -> tuple[int, int]:
        # (size bound, modal depth bound) of the normal form
        if isinstance(f, BINARY):
            (b1, m1), (b2, m2) = go(f.left), go(f.right)
            return b1 + b2 + 1, max(m1, m2)
        if isinstance(f, MODAL):
            b, m = go(f.body)
            return b + 1, m + 1
        if isinstance(f, DYNAMIC):
            b, m = go(f.body)
            pb, pm, fan = pre_bound(f.action.name)
            return b * (pb + 3) * fan ** m, max(m, pm)
        return 1, 0

    return go(phi)[0]


# ------------------------------------------------------- equivalence oracle


@dataclass
class Verdict:
    equivalent: bool
    models_checked: int
    exhaustive: bool
    countermodel: object = None
    world: object = None

    def __bool__(self) -> bool:
        return self.equivalent


def equivalence_check(phi: Formula, psi: Formula, env: ActionEnv, models: Iterable | None = None,
                      max_worlds: int = 3, seed: int = 0) -> Verdict:
    """Compare extensions on a model bank; returns the first differing (model, world).

    Without explicit ``models`` the default regression bank over the
    formulas' atoms and agents is used. ``exhaustive`` reports whether the
    bank covered every model of the bounded class.
    """
    from .bank import regression_bank

    exhaustive = False
    if models is None:
        atoms = sorted(env.all_atoms(phi) | env.all_atoms(psi))
        agents = sorted(_agents(phi, env) | _agents(psi, env))
        models, exhaustive = regression_bank(atoms, agents, max_worlds=max_worlds, seed=seed)
    count = 0
    for m in models:
        count += 1
        x = extension_mask(m, env, phi)
        y = extension_mask(m, env, psi)
        if x != y:
            diff = x ^ y
            w = m.frame.worlds[(diff & -diff).bit_length() - 1]
            return Verdict(False, count, exhaustive, m, w)
    return Verdict(True, count, exhaustive)


def _agents(phi: Formula, env: ActionEnv) -> set[str]:
    out, seen, todo = set(), set(), [phi]
    while todo:
        f = todo.pop()
        out |= agents_of(f)
        for name in action_names(f) - seen:
            seen.add(name)
            act = env[name]
            out |= set(act.rel)
            todo.extend(act.pre.values())
    return out
