"""Relational semantics: classical Kripke models and intuitionistic IK/MIPC models.

Subsets of worlds are int bitmasks over the frame's world index. Truth is
downward persistent: valuations are downsets and implication looks at all
worlds below the current one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from .syntax import (
    ActionEnv, ActionStructure, And, Atom, Bot, Box, Dia, DynBox, DynDia, Formula, Imp, Or,
)

World = Hashable


def bits(mask: int) -> Iterable[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def compose_masks(s: list[int], t: list[int]) -> list[int]:
    """Diagrammatic composition: x (s;t) z iff x s y and y t z for some y."""
    out = []
    for m in s:
        acc = 0
        for j in bits(m):
            acc |= t[j]
        out.append(acc)
    return out


def reflexive_transitive_closure(worlds, pairs) -> frozenset:
    idx = {w: i for i, w in enumerate(worlds)}
    n = len(worlds)
    up = [1 << i for i in range(n)]
    for v, w in pairs:
        up[idx[v]] |= 1 << idx[w]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            acc = up[i]
            for j in bits(up[i]):
                acc |= up[j]
            if acc != up[i]:
                up[i] = acc
                changed = True
    return frozenset((worlds[i], worlds[j]) for i in range(n) for j in bits(up[i]))


@dataclass(frozen=True, eq=False)
class Frame:
    """Poset of worlds with one accessibility relation per agent.

    ``order`` holds pairs (w, v) with w <= v and is taken as given, so a
    malformed order can be reported by ``check_ik_frame``. Use ``Frame.make``
    to close generating pairs.
    """

    worlds: tuple
    order: frozenset
    rel: Mapping[str, frozenset]

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        if len(set(self.worlds)) != len(self.worlds):
            raise ValueError("duplicate worlds")
        ws = set(self.worlds)
        order = frozenset(tuple(p) for p in self.order)
        for v, w in order:
            if v not in ws or w not in ws:
                raise ValueError(f"order pair {(v, w)} outside the world set")
        rel = {}
        for a, pairs in self.rel.items():
            pairs = frozenset(tuple(p) for p in pairs)
            for v, w in pairs:
                if v not in ws or w not in ws:
                    raise ValueError(f"relation {a}: pair {(v, w)} outside the world set")
            rel[a] = pairs
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "rel", rel)

    @classmethod
    def make(cls, worlds, rel, order=()) -> "Frame":
        worlds = tuple(worlds)
        return cls(worlds, reflexive_transitive_closure(worlds, order), rel)

    @classmethod
    def classical(cls, worlds, rel) -> "Frame":
        worlds = tuple(worlds)
        return cls(worlds, frozenset((w, w) for w in worlds), rel)

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(sorted(self.rel))

    @cached_property
    def index(self) -> dict:
        return {w: i for i, w in enumerate(self.worlds)}

    @property
    def n(self) -> int:
        return len(self.worlds)

    @cached_property
    def full(self) -> int:
        return (1 << len(self.worlds)) - 1

    @cached_property
    def up(self) -> list[int]:
        up = [0] * self.n
        for v, w in self.order:
            up[self.index[v]] |= 1 << self.index[w]
        return up

    @cached_property
    def down(self) -> list[int]:
        down = [0] * self.n
        for v, w in self.order:
            down[self.index[w]] |= 1 << self.index[v]
        return down

    def succ(self, agent: str) -> list[int]:
        return self._succ.get(agent) or [0] * self.n

    @cached_property
    def _succ(self) -> dict[str, list[int]]:
        out = {}
        for a, pairs in self.rel.items():
            m = [0] * self.n
            for v, w in pairs:
                m[self.index[v]] |= 1 << self.index[w]
            out[a] = m
        return out

    @cached_property
    def _ge_succ(self) -> dict[str, list[int]]:
        # successors along >= ; R, used by the box clause
        return {a: compose_masks(self.down, m) for a, m in self._succ.items()}

    @cached_property
    def is_discrete(self) -> bool:
        return all(self.up[i] == 1 << i for i in range(self.n))

    def mask(self, ws: Iterable[World]) -> int:
        m = 0
        for w in ws:
            m |= 1 << self.index[w]
        return m

    def subset(self, mask: int) -> frozenset:
        return frozenset(self.worlds[i] for i in bits(mask))

    def upset(self, mask: int) -> int:
        acc = 0
        for i in bits(mask):
            acc |= self.up[i]
        return acc

    def downclosure(self, mask: int) -> int:
        acc = 0
        for i in bits(mask):
            acc |= self.down[i]
        return acc

    def is_downset(self, mask: int) -> bool:
        return self.downclosure(mask) == mask

    def imp(self, x: int, y: int) -> int:
        return self.full & ~self.upset(x & ~y)

    def dia(self, agent: str, x: int) -> int:
        succ = self._succ.get(agent)
        if succ is None:
            return 0
        out = 0
        for i, m in enumerate(succ):
            if m & x:
                out |= 1 << i
        return out

    def box(self, agent: str, x: int) -> int:
        succ = self._ge_succ.get(agent)
        if succ is None:
            return self.full
        out = 0
        for i, m in enumerate(succ):
            if m & ~x == 0:
                out |= 1 << i
        return out


# ------------------------------------------------------------ frame checks


@dataclass(frozen=True)
class Violation:
    condition: str
    agent: str | None
    witnesses: tuple

    def __str__(self) -> str:
        who = f" agent {self.agent}" if self.agent is not None else ""
        shown = ", ".join(map(str, self.witnesses[:5]))
        more = "" if len(self.witnesses) <= 5 else f" (+{len(self.witnesses) - 5} more)"
        return f"{self.condition}{who}: {shown}{more}"


@dataclass
class FrameReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> set[str]:
        return {v.condition for v in self.violations}


CONDITIONS = {
    "ik1": "R;>= included in >=;R",
    "ik2": "<=;R included in R;<=",
    "ik3": "R equals (>=;R) meet (R;<=)",
}


def compose(s: frozenset, t: frozenset) -> frozenset:
    by_src: dict = {}
    for y, z in t:
        by_src.setdefault(y, set()).add(z)
    return frozenset((x, z) for x, y in s for z in by_src.get(y, ()))


def check_ik_frame(frame: Frame, mode: str = "ik") -> FrameReport:
    """Report every violated order axiom and interaction condition.

    Works directly on pair sets so it stays independent of the bitmask
    machinery used by the evaluators. ``mode="mipc"`` also demands that each
    relation is an equivalence.
    """
    rep = FrameReport()
    ws = frame.worlds
    le = frame.order
    ge = frozenset((y, x) for x, y in le)
    missing = tuple((w, w) for w in ws if (w, w) not in le)
    if missing:
        rep.violations.append(Violation("order-reflexive", None, missing))
    bad = tuple(sorted(compose(le, le) - le, key=repr))
    if bad:
        rep.violations.append(Violation("order-transitive", None, bad))
    anti = tuple(sorted(((x, y) for x, y in le if x != y and (y, x) in le), key=repr))
    if anti:
        rep.violations.append(Violation("order-antisymmetric", None, anti))
    for a in frame.agents:
        r = frame.rel[a]
        ge_r = compose(ge, r)
        r_le = compose(r, le)
        bad1 = compose(r, ge) - ge_r
        bad2 = compose(le, r) - r_le
        bad3 = (ge_r & r_le) ^ r
        for name, bad in (("ik1", bad1), ("ik2", bad2), ("ik3", bad3)):
            if bad:
                rep.violations.append(Violation(name, a, tuple(sorted(bad, key=repr))))
        if mode == "mipc":
            eq_bad = [(w, w) for w in ws if (w, w) not in r]
            eq_bad += [(y, x) for x, y in r if (y, x) not in r]
            eq_bad += list(compose(r, r) - r)
            if eq_bad:
                rep.violations.append(Violation("equivalence", a, tuple(sorted(set(eq_bad), key=repr))))
    return rep


def is_ik_frame(frame: Frame) -> bool:
    """Fast bitmask version of the three interaction conditions (order assumed valid)."""
    le, ge = frame.up, frame.down
    for a in frame.agents:
        r = frame.succ(a)
        ge_r = compose_masks(ge, r)
        r_le = compose_masks(r, le)
        r_ge = compose_masks(r, ge)
        le_r = compose_masks(le, r)
        for i in range(frame.n):
            if r_ge[i] & ~ge_r[i] or le_r[i] & ~r_le[i] or (ge_r[i] & r_le[i]) != r[i]:
                return False
    return True


def is_equivalence(frame: Frame, agent: str) -> bool:
    r = frame.succ(agent)
    n = frame.n
    for i in range(n):
        if not r[i] >> i & 1:
            return False
        for j in bits(r[i]):
            if not r[j] >> i & 1 or r[j] & ~r[i]:
                return False
    return True


# ----------------------------------------------------------------- models


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Model:
    frame: Frame
    val: Mapping[str, frozenset]
    kind: str = "ik"

    def __post_init__(self):
        if self.kind not in ("classical", "ik", "mipc"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        val = {}
        for p, ws in self.val.items():
            ws = frozenset(ws)
            if not ws <= set(self.frame.worlds):
                raise ValueError(f"valuation of {p} mentions unknown worlds")
            val[p] = ws
        object.__setattr__(self, "val", val)

    @property
    def worlds(self) -> tuple:
        return self.frame.worlds

    @cached_property
    def valmask(self) -> dict[str, int]:
        return {p: self.frame.mask(ws) for p, ws in self.val.items()}

    def check_valuation(self) -> list[str]:
        """Atoms whose value is not a downset."""
        return [p for p, m in self.valmask.items() if not self.frame.is_downset(m)]

    def atoms_true_at(self, w: World) -> list[str]:
        return sorted(p for p, ws in self.val.items() if w in ws)


def classical_model(worlds, rel, val) -> Model:
    return Model(Frame.classical(worlds, rel), val, "classical")


@dataclass(frozen=True, eq=False)
class UpdateTrace:
    """Intermediate structure, surviving pairs, and the embeddings between them."""

    base: Model
    action: ActionStructure
    intermediate: Model
    surviving: frozenset
    updated: Model

    def iota(self, k: str) -> dict:
        """The k-th coproduct injection as an explicit world map."""
        return {w: (w, k) for w in self.base.worlds}

    @property
    def inclusion(self) -> dict:
        """Inclusion of the updated model into the intermediate structure."""
        return {u: u for u in self.updated.worlds}

    @cached_property
    def by_state(self) -> dict[str, list[tuple[int, int]]]:
        """For each state j: (bit in updated model, bit in base model) pairs."""
        base_idx = self.base.frame.index
        out = {k: [] for k in self.action.states}
        for u, (w, k) in enumerate(self.updated.worlds):
            out[k].append((1 << u, 1 << base_idx[w]))
        return out

    def pullback(self, mask: int, k: str) -> int:
        """iota_k^{-1}[i[X]] for X given as a mask over the updated worlds."""
        out = 0
        for ubit, wbit in self.by_state[k]:
            if mask & ubit:
                out |= wbit
        return out


def product_frame(frame: Frame, action: ActionStructure) -> Frame:
    states = action.states
    worlds = tuple((w, k) for k in states for w in frame.worlds)
    order = frozenset(((v, k), (w, k)) for k in states for v, w in frame.order)
    agents = set(frame.rel) | set(action.rel)
    rel = {}
    for a in sorted(agents):
        fr = frame.rel.get(a, frozenset())
        ar = action.rel.get(a, frozenset())
        rel[a] = frozenset(((v, i), (w, j)) for v, w in fr for i, j in ar)
    return Frame(worlds, order, rel)


def restrict_frame(frame: Frame, keep: Iterable[World]) -> Frame:
    keep = [w for w in frame.worlds if w in set(keep)]
    ks = set(keep)
    order = frozenset((v, w) for v, w in frame.order if v in ks and w in ks)
    rel = {a: frozenset((v, w) for v, w in ps if v in ks and w in ks) for a, ps in frame.rel.items()}
    return Frame(tuple(keep), order, rel)


def update_frame(frame: Frame, action: ActionStructure, pre_sets: Mapping[str, Iterable[World]]) -> Frame:
    """Frame update: the intermediate frame restricted to (w, j) with w in pre_sets[j]."""
    inter = product_frame(frame, action)
    keep = [(w, k) for k in action.states for w in frame.worlds if w in set(pre_sets[k])]
    return restrict_frame(inter, keep)


def coproduct_model(model: Model, action: ActionStructure) -> Model:
    frame = product_frame(model.frame, action)
    val = {p: frozenset((w, k) for k in action.states for w in ws) for p, ws in model.val.items()}
    return Model(frame, val, model.kind)


def product_update(model: Model, action: ActionStructure, env: ActionEnv) -> tuple[Model, UpdateTrace]:
    """Update ``model`` by ``action``; memoized per (model, env, action name)."""
    cache = _cache(model, env)
    hit = cache.updates.get(action.name)
    if hit is not None and hit.action.rel == action.rel and hit.action.pre == action.pre:
        return hit.updated, hit
    inter = coproduct_model(model, action)
    pre = {k: _eval(model, env, action.pre[k]) for k in action.states}
    surviving = frozenset((w, k) for k in action.states for w in model.frame.subset(pre[k]))
    frame = restrict_frame(inter.frame, surviving)
    val = {p: ws & surviving for p, ws in inter.val.items()}
    updated = Model(frame, val, model.kind)
    trace = UpdateTrace(model, action, inter, surviving, updated)
    cache.updates[action.name] = trace
    return updated, trace


# ------------------------------------------------------------- evaluation


class _Cache:
    __slots__ = ("env", "ext", "updates")

    def __init__(self, env):
        self.env = env
        self.ext: dict[Formula, int] = {}
        self.updates: dict[str, UpdateTrace] = {}


def _cache(model: Model, env: ActionEnv) -> _Cache:
    caches = model.__dict__.setdefault("_caches", {})
    c = caches.get(id(env))
    if c is None or c.env is not env:
        c = caches[id(env)] = _Cache(env)
    return c


def _eval(model: Model, env: ActionEnv, phi: Formula) -> int:
    cache = _cache(model, env)
    hit = cache.ext.get(phi)
    if hit is not None:
        return hit
    fr = model.frame
    if isinstance(phi, Atom):
        try:
            out = model.valmask[phi.name]
        except KeyError:
            raise EvaluationError(f"atom {phi.name!r} has no valuation") from None
    elif isinstance(phi, Bot):
        out = 0
    elif isinstance(phi, And):
        out = _eval(model, env, phi.left) & _eval(model, env, phi.right)
    elif isinstance(phi, Or):
        out = _eval(model, env, phi.left) | _eval(model, env, phi.right)
    elif isinstance(phi, Imp):
        out = fr.imp(_eval(model, env, phi.left), _eval(model, env, phi.right))
    elif isinstance(phi, Dia):
        out = fr.dia(phi.agent, _eval(model, env, phi.body))
    elif isinstance(phi, Box):
        out = fr.box(phi.agent, _eval(model, env, phi.body))
    elif isinstance(phi, (DynDia, DynBox)):
        act = env[phi.action.name]
        k = env.point(phi.action)
        updated, trace = product_update(model, act, env)
        inner = trace.pullback(_eval(updated, env, phi.body), k)
        pre = _eval(model, env, act.pre[k])
        out = pre & inner if isinstance(phi, DynDia) else fr.imp(pre, inner)
    else:
        raise TypeError(f"not a formula: {phi!r}")
    cache.ext[phi] = out
    return out


def extension_mask(model: Model, env: ActionEnv, phi: Formula) -> int:
    return _eval(model, env, phi)


def eval_ik(model: Model, env: ActionEnv, phi: Formula) -> frozenset:
    bad = model.check_valuation()
    if bad:
        raise EvaluationError(f"valuation of {', '.join(sorted(bad))} is not a downset")
    return model.frame.subset(_eval(model, env, phi))


def eval_classical(model: Model, env: ActionEnv, phi: Formula) -> frozenset:
    if not model.frame.is_discrete:
        raise EvaluationError("classical evaluation needs a discretely ordered frame")
    return model.frame.subset(_eval(model, env, phi))


def evaluate(model: Model, env: ActionEnv, phi: Formula) -> frozenset:
    return eval_classical(model, env, phi) if model.kind == "classical" else eval_ik(model, env, phi)
