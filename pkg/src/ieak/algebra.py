"""Finite Heyting algebras with operators, their indexed products and quotients.

Two representations coexist. ``TableHAO`` stores every operation as a numpy
table and is what the exhaustive checks run on. ``ProductAlgebra`` and
``QuotientAlgebra`` are lazy: elements are tuples of base elements and
operations are computed on demand, which keeps nested updates cheap. Both
can be turned into tables with ``.table()``.
"""
from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

Element = Hashable


class AlgebraError(ValueError):
    pass


class FiniteHAO:
    """Interface shared by table-backed and lazy algebras."""

    agents: tuple[str, ...] = ()

    @property
    def elements(self) -> list:
        raise NotImplementedError

    @property
    def bot(self):
        raise NotImplementedError

    @property
    def top(self):
        raise NotImplementedError

    def leq(self, x, y) -> bool:
        raise NotImplementedError

    def meet(self, x, y):
        raise NotImplementedError

    def join(self, x, y):
        raise NotImplementedError

    def imp(self, x, y):
        raise NotImplementedError

    def dia(self, agent: str, x):
        raise NotImplementedError

    def box(self, agent: str, x):
        raise NotImplementedError

    def bdia(self, agent: str, x):
        raise NotImplementedError

    def bbox(self, agent: str, x):
        raise NotImplementedError

    @property
    def has_tense(self) -> bool:
        return False

    def neg(self, x):
        return self.imp(x, self.bot)

    def big_join(self, xs: Iterable):
        return reduce(self.join, xs, self.bot)

    def big_meet(self, xs: Iterable):
        return reduce(self.meet, xs, self.top)

    def label(self, x) -> str:
        return str(x)

    def __len__(self) -> int:
        return len(self.elements)


# ------------------------------------------------------------------ lattices


@dataclass(frozen=True, eq=False)
class FiniteLattice:
    labels: tuple[str, ...]
    leq: np.ndarray
    meet: np.ndarray
    join: np.ndarray
    bot: int
    top: int

    @property
    def n(self) -> int:
        return len(self.labels)

    @classmethod
    def from_order(cls, labels: Sequence[str], leq: np.ndarray) -> "FiniteLattice":
        leq = np.asarray(leq, dtype=bool)
        n = len(labels)
        if leq.shape != (n, n):
            raise AlgebraError("order matrix has the wrong shape")
        if not leq.diagonal().all():
            raise AlgebraError("order is not reflexive")
        if (leq & leq.T & ~np.eye(n, dtype=bool)).any():
            raise AlgebraError("order is not antisymmetric")
        if ((leq.astype(np.int64) @ leq.astype(np.int64) > 0) & ~leq).any():
            raise AlgebraError("order is not transitive")
        join = _bound_table(leq)
        meet = _bound_table(leq.T)
        if join is None or meet is None:
            raise AlgebraError("order is not a lattice")
        bots = np.nonzero(leq.all(axis=1))[0]
        tops = np.nonzero(leq.all(axis=0))[0]
        if len(bots) != 1 or len(tops) != 1:
            raise AlgebraError("lattice has no bottom or top")
        return cls(tuple(labels), leq, meet, join, int(bots[0]), int(tops[0]))


def _bound_table(leq: np.ndarray) -> np.ndarray | None:
    """Least upper bounds of all pairs w.r.t. ``leq``, or None if some are missing."""
    n = leq.shape[0]
    below = leq.sum(axis=0)  # number of elements below each element
    ub = leq[:, None, :] & leq[None, :, :]  # ub[x, y, u]: x <= u and y <= u
    score = np.where(ub, below[None, None, :], n + 1)
    lub = score.argmin(axis=2)
    if (score.min(axis=2) > n).any():
        return None
    # the candidate must sit below every upper bound
    if not (leq[lub] | ~ub).all():
        return None
    return lub


def heyting_implies(lat: FiniteLattice, y: int, z: int) -> int:
    """Relative pseudocomplement y -> z as the join of all x with x & y <= z."""
    xs = [x for x in range(lat.n) if lat.leq[lat.meet[x, y], z]]
    out = reduce(lambda a, b: int(lat.join[a, b]), xs, lat.bot)
    if not lat.leq[lat.meet[out, y], z]:
        raise AlgebraError(f"no implication {lat.labels[y]} -> {lat.labels[z]}: not a Heyting algebra")
    return out


def implication_table(lat: FiniteLattice) -> np.ndarray:
    n = lat.n
    cond = lat.leq[lat.meet[:, :, None], np.arange(n)[None, None, :]]  # cond[x, y, z]
    res = np.full((n, n), lat.bot, dtype=np.int64)
    for x in range(n):
        res = np.where(cond[x], lat.join[res, x], res)
    ok = lat.leq[lat.meet[res, np.arange(n)[:, None]], np.arange(n)[None, :]]
    if not ok.all():
        y, z = map(int, np.argwhere(~ok)[0])
        raise AlgebraError(f"no implication {lat.labels[y]} -> {lat.labels[z]}: not a Heyting algebra")
    return res


# ---------------------------------------------------------------- table HAO


class TableHAO(FiniteHAO):
    """Finite HAO with every operation stored as an integer table over 0..n-1."""

    def __init__(self, lattice: FiniteLattice, imp: np.ndarray, dia: Mapping[str, np.ndarray],
                 box: Mapping[str, np.ndarray], bdia: Mapping[str, np.ndarray] | None = None,
                 bbox: Mapping[str, np.ndarray] | None = None):
        self.lattice = lattice
        self.imp_t = np.asarray(imp, dtype=np.int64)
        self.dia_t = {a: np.asarray(t, dtype=np.int64) for a, t in dia.items()}
        self.box_t = {a: np.asarray(t, dtype=np.int64) for a, t in box.items()}
        if set(self.dia_t) != set(self.box_t):
            raise AlgebraError("diamond and box tables must cover the same agents")
        self.bdia_t = None if bdia is None else {a: np.asarray(t, dtype=np.int64) for a, t in bdia.items()}
        self.bbox_t = None if bbox is None else {a: np.asarray(t, dtype=np.int64) for a, t in bbox.items()}
        self.agents = tuple(sorted(self.dia_t))

    @classmethod
    def from_order(cls, labels, leq, dia, box) -> "TableHAO":
        """Derive meet, join and implication from the order; verify residuation."""
        lat = FiniteLattice.from_order(labels, leq)
        alg = cls(lat, implication_table(lat), dia, box)
        bad = residuation_failures(alg)
        if bad:
            raise AlgebraError(f"residuation fails at {bad[0]}: not a Heyting algebra")
        return alg

    @property
    def n(self) -> int:
        return self.lattice.n

    @property
    def labels(self) -> tuple[str, ...]:
        return self.lattice.labels

    @property
    def leq_t(self) -> np.ndarray:
        return self.lattice.leq

    @property
    def meet_t(self) -> np.ndarray:
        return self.lattice.meet

    @property
    def join_t(self) -> np.ndarray:
        return self.lattice.join

    @cached_property
    def elements(self) -> list[int]:
        return list(range(self.n))

    @property
    def bot(self) -> int:
        return self.lattice.bot

    @property
    def top(self) -> int:
        return self.lattice.top

    def leq(self, x, y) -> bool:
        return bool(self.lattice.leq[x, y])

    def meet(self, x, y) -> int:
        return int(self.lattice.meet[x, y])

    def join(self, x, y) -> int:
        return int(self.lattice.join[x, y])

    def imp(self, x, y) -> int:
        return int(self.imp_t[x, y])

    def dia(self, agent, x) -> int:
        t = self.dia_t.get(agent)
        return self.bot if t is None else int(t[x])

    def box(self, agent, x) -> int:
        t = self.box_t.get(agent)
        return self.top if t is None else int(t[x])

    @property
    def has_tense(self) -> bool:
        return self.bdia_t is not None

    def bdia(self, agent, x) -> int:
        if self.bdia_t is None:
            raise AlgebraError("algebra has no tense tables; call tense_adjoints first")
        t = self.bdia_t.get(agent)
        return self.bot if t is None else int(t[x])

    def bbox(self, agent, x) -> int:
        if self.bbox_t is None:
            raise AlgebraError("algebra has no tense tables; call tense_adjoints first")
        t = self.bbox_t.get(agent)
        return self.top if t is None else int(t[x])

    def label(self, x) -> str:
        return self.labels[x]

    def big_join_mask(self, mask: np.ndarray) -> int:
        out = self.bot
        for x in np.nonzero(mask)[0]:
            out = int(self.join_t[out, x])
        return out

    def with_tense(self, bdia, bbox) -> "TableHAO":
        out = copy.copy(self)
        out.bdia_t = {a: np.asarray(t, dtype=np.int64) for a, t in bdia.items()}
        out.bbox_t = {a: np.asarray(t, dtype=np.int64) for a, t in bbox.items()}
        return out

    def relabel(self, labels: Sequence[str]) -> "TableHAO":
        lat = self.lattice
        new = FiniteLattice(tuple(labels), lat.leq, lat.meet, lat.join, lat.bot, lat.top)
        return TableHAO(new, self.imp_t, self.dia_t, self.box_t, self.bdia_t, self.bbox_t)


def residuation_failures(alg: TableHAO, limit: int = 5) -> list[tuple]:
    n = alg.n
    x = np.arange(n)[:, None, None]
    y = np.arange(n)[None, :, None]
    z = np.arange(n)[None, None, :]
    lhs = alg.leq_t[alg.meet_t[x, y], z]
    rhs = alg.leq_t[x, alg.imp_t[y, z]]
    return [tuple(map(int, t)) for t in np.argwhere(lhs != rhs)[:limit]]


def tabulate(alg: FiniteHAO) -> TableHAO:
    """Generic (slow) conversion of any finite HAO into tables."""
    if isinstance(alg, TableHAO):
        return alg
    els = list(alg.elements)
    pos = {e: i for i, e in enumerate(els)}
    n = len(els)
    leq = np.array([[alg.leq(x, y) for y in els] for x in els], dtype=bool)
    meet = np.array([[pos[alg.meet(x, y)] for y in els] for x in els], dtype=np.int64)
    join = np.array([[pos[alg.join(x, y)] for y in els] for x in els], dtype=np.int64)
    imp = np.array([[pos[alg.imp(x, y)] for y in els] for x in els], dtype=np.int64)
    lat = FiniteLattice(tuple(alg.label(e) for e in els), leq, meet, join, pos[alg.bot], pos[alg.top])
    dia = {a: np.array([pos[alg.dia(a, x)] for x in els]) for a in alg.agents}
    box = {a: np.array([pos[alg.box(a, x)] for x in els]) for a in alg.agents}
    bdia = bbox = None
    if alg.has_tense:
        bdia = {a: np.array([pos[alg.bdia(a, x)] for x in els]) for a in alg.agents}
        bbox = {a: np.array([pos[alg.bbox(a, x)] for x in els]) for a in alg.agents}
    assert n == lat.n
    return TableHAO(lat, imp, dia, box, bdia, bbox)


# ------------------------------------------------------------- tense adjoints


def tense_adjoints(alg: TableHAO) -> TableHAO:
    """Fill in the black modalities as adjoints of box and diamond.

    The right adjoint of diamond is y -> join{x : dia x <= y}; the left
    adjoint of box is x -> meet{y : x <= box y}. Both adjunctions are
    checked on all pairs before returning.
    """
    n = alg.n
    leq, meet, join = alg.leq_t, alg.meet_t, alg.join_t
    bdia, bbox = {}, {}
    for a in alg.agents:
        d, b = alg.dia_t[a], alg.box_t[a]
        bb = np.full(n, alg.bot, dtype=np.int64)
        for x in range(n):
            bb = np.where(leq[d[x]], join[bb, x], bb)  # over y: dia x <= y
        bd = np.full(n, alg.top, dtype=np.int64)
        for y in range(n):
            bd = np.where(leq[:, b[y]], meet[bd, y], bd)  # over x: x <= box y
        left = leq[d[:, None], np.arange(n)[None, :]]
        if (left != leq[np.arange(n)[:, None], bb[None, :]]).any():
            raise AlgebraError(f"diamond of agent {a} has no right adjoint: not normal")
        right = leq[bd[:, None], np.arange(n)[None, :]]
        if (right != leq[np.arange(n)[:, None], b[None, :]]).any():
            raise AlgebraError(f"box of agent {a} has no left adjoint: not normal")
        bdia[a], bbox[a] = bd, bb
    return alg.with_tense(bdia, bbox)


def adjunction_failures(alg: TableHAO, limit: int = 5) -> list[tuple]:
    """Pairs breaking dia -| bbox or bdia -| box."""
    n = alg.n
    x = np.arange(n)[:, None]
    y = np.arange(n)[None, :]
    out = []
    for a in alg.agents:
        d, b, bd, bb = alg.dia_t[a], alg.box_t[a], alg.bdia_t[a], alg.bbox_t[a]
        bad1 = alg.leq_t[d[x], y] != alg.leq_t[x, bb[y]]
        bad2 = alg.leq_t[bd[x], y] != alg.leq_t[x, b[y]]
        out += [("dia-bbox", a, tuple(map(int, t))) for t in np.argwhere(bad1)[:limit]]
        out += [("bdia-box", a, tuple(map(int, t))) for t in np.argwhere(bad2)[:limit]]
    return out


# ---------------------------------------------------------------- FSA checks


@dataclass
class AlgebraReport:
    violations: list[tuple[str, str | None, tuple]] = field(default_factory=list)
    checked: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> set[str]:
        return {c for c, _, _ in self.violations}

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked,
                "violations": [{"condition": c, "agent": a, "witness": list(w)} for c, a, w in self.violations]}


FSA_CONDITIONS = ("box-K", "box-top", "box-meet", "dia-join", "dia-bot", "FS1", "FS2")
MHA_CONDITIONS = ("T-box", "T-dia", "5-dia", "5-box", "box-dia-K")


def check_fsa(alg: FiniteHAO, mode: str = "fsa", limit: int = 3) -> AlgebraReport:
    """Scan all element pairs for the FSA inequalities (and MHA ones in ``mha`` mode).

    Normality of both operators is checked alongside, since the inequalities
    alone do not force monotonicity.
    """
    t = tabulate(alg)
    n = t.n
    leq, meet, join, imp = t.leq_t, t.meet_t, t.join_t, t.imp_t
    x = np.arange(n)[:, None]
    y = np.arange(n)[None, :]
    rep = AlgebraReport()
    conds = FSA_CONDITIONS + (MHA_CONDITIONS if mode == "mha" else ())
    rep.checked = list(conds)

    def record(name, agent, bad):
        bad = np.atleast_1d(bad)
        for w in np.argwhere(bad)[:limit]:
            rep.violations.append((name, agent, tuple(int(v) for v in w)))

    for a in t.agents:
        d, b = t.dia_t[a], t.box_t[a]
        ones = np.arange(n)
        record("box-K", a, ~leq[b[imp[x, y]], imp[b[x], b[y]]])
        record("box-top", a, np.array([b[t.top] != t.top]))
        record("box-meet", a, b[meet[x, y]] != meet[b[x], b[y]])
        record("dia-join", a, d[join[x, y]] != join[d[x], d[y]])
        record("dia-bot", a, np.array([d[t.bot] != t.bot]))
        record("FS1", a, ~leq[d[imp[x, y]], imp[b[x], d[y]]])
        record("FS2", a, ~leq[imp[d[x], b[y]], b[imp[x, y]]])
        if mode == "mha":
            record("T-box", a, ~leq[b[ones], ones])
            record("T-dia", a, ~leq[ones, d[ones]])
            record("5-dia", a, ~leq[d[ones], b[d[ones]]])
            record("5-box", a, ~leq[d[b[ones]], b[ones]])
            record("box-dia-K", a, ~leq[b[imp[x, y]], imp[d[x], d[y]]])
    return rep


def check_heyting(alg: FiniteHAO) -> AlgebraReport:
    """Lattice laws, bounds and residuation on all triples."""
    t = tabulate(alg)
    n = t.n
    leq, meet, join = t.leq_t, t.meet_t, t.join_t
    x = np.arange(n)[:, None]
    y = np.arange(n)[None, :]
    rep = AlgebraReport(checked=["meet-glb", "join-lub", "bounds", "residuation"])
    for name, ok in (("meet-glb", leq[meet[x, y], x] & leq[meet[x, y], y]),
                     ("join-lub", leq[x, join[x, y]] & leq[y, join[x, y]])):
        for w in np.argwhere(~ok)[:3]:
            rep.violations.append((name, None, tuple(map(int, w))))
    # greatest lower bound: every common lower bound z sits below meet(x, y)
    z = np.arange(n)[:, None, None]
    glb = ~(leq[z, x[None]] & leq[z, y[None]]) | leq[z, meet[x, y][None]]
    for w in np.argwhere(~glb)[:3]:
        rep.violations.append(("meet-glb", None, tuple(map(int, w))))
    lub = ~(leq[x[None], z] & leq[y[None], z]) | leq[join[x, y][None], z]
    for w in np.argwhere(~lub)[:3]:
        rep.violations.append(("join-lub", None, tuple(map(int, w))))
    if not (leq[t.bot].all() and leq[:, t.top].all()):
        rep.violations.append(("bounds", None, (t.bot, t.top)))
    for w in residuation_failures(t, 3):
        rep.violations.append(("residuation", None, w))
    return rep


# ------------------------------------------------------------ actions on A


@dataclass(frozen=True, eq=False)
class AlgebraAction:
    """Action structure whose preconditions are algebra elements."""

    states: tuple[str, ...]
    designated: str
    rel: Mapping[str, frozenset]
    pre: Mapping[str, Element]
    name: str = "a"

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise AlgebraError("action has no states")
        if self.designated not in self.states:
            raise AlgebraError(f"designated state {self.designated!r} not declared")
        rel = {a: frozenset(tuple(p) for p in ps) for a, ps in self.rel.items()}
        for a, ps in rel.items():
            for i, j in ps:
                if i not in self.states or j not in self.states:
                    raise AlgebraError(f"relation {a} uses an unknown state")
        object.__setattr__(self, "rel", rel)
        if set(self.pre) != set(self.states):
            raise AlgebraError("preconditions must cover exactly the states")

    @cached_property
    def succ_idx(self) -> dict[str, list[list[int]]]:
        pos = {k: i for i, k in enumerate(self.states)}
        out = {}
        for a, ps in self.rel.items():
            lst = [[] for _ in self.states]
            for i, j in sorted(ps, key=lambda p: (pos[p[0]], pos[p[1]])):
                lst[pos[i]].append(pos[j])
            out[a] = lst
        return out

    @cached_property
    def pred_idx(self) -> dict[str, list[list[int]]]:
        pos = {k: i for i, k in enumerate(self.states)}
        out = {}
        for a, ps in self.rel.items():
            lst = [[] for _ in self.states]
            for i, j in sorted(ps, key=lambda p: (pos[p[1]], pos[p[0]])):
                lst[pos[j]].append(pos[i])
            out[a] = lst
        return out

    def is_equivalence(self, agent: str) -> bool:
        r = self.rel.get(agent, frozenset())
        ks = self.states
        return (all((k, k) in r for k in ks) and all((j, i) in r for i, j in r)
                and all((i, l) in r for i, j in r for jj, l in r if j == jj))

    def shifted(self, k: str) -> "AlgebraAction":
        return AlgebraAction(self.states, k, self.rel, self.pre, self.name)


class ProductAlgebra(FiniteHAO):
    """The |K|-fold power of ``base`` with the action-indexed modal operators."""

    def __init__(self, base: FiniteHAO, action: AlgebraAction):
        self.base = base
        self.action = action
        self.k = len(action.states)
        self.agents = tuple(base.agents)
        self._succ = action.succ_idx
        self._pred = action.pred_idx

    @cached_property
    def elements(self) -> list[tuple]:
        return list(itertools.product(self.base.elements, repeat=self.k))

    @property
    def bot(self) -> tuple:
        return (self.base.bot,) * self.k

    @property
    def top(self) -> tuple:
        return (self.base.top,) * self.k

    @cached_property
    def pre(self) -> tuple:
        return tuple(self.action.pre[s] for s in self.action.states)

    def const(self, x) -> tuple:
        return (x,) * self.k

    def coord(self, f, state: str):
        """pi_k: the coordinate of ``f`` at ``state``."""
        return f[self.action.states.index(state)]

    def leq(self, f, g) -> bool:
        return all(self.base.leq(a, b) for a, b in zip(f, g))

    def meet(self, f, g):
        return tuple(self.base.meet(a, b) for a, b in zip(f, g))

    def join(self, f, g):
        return tuple(self.base.join(a, b) for a, b in zip(f, g))

    def imp(self, f, g):
        return tuple(self.base.imp(a, b) for a, b in zip(f, g))

    def dia(self, agent, f):
        base = self.base
        succ = self._succ.get(agent)
        if succ is None:
            return self.bot
        return tuple(base.big_join(base.dia(agent, f[i]) for i in succ[j]) for j in range(self.k))

    def box(self, agent, f):
        base = self.base
        succ = self._succ.get(agent)
        if succ is None:
            return self.top
        return tuple(base.big_meet(base.box(agent, f[i]) for i in succ[j]) for j in range(self.k))

    @property
    def has_tense(self) -> bool:
        return self.base.has_tense

    def bdia(self, agent, f):
        base = self.base
        pred = self._pred.get(agent)
        if pred is None:
            return self.bot
        return tuple(base.big_join(base.bdia(agent, f[i]) for i in pred[j]) for j in range(self.k))

    def bbox(self, agent, f):
        base = self.base
        pred = self._pred.get(agent)
        if pred is None:
            return self.top
        return tuple(base.big_meet(base.bbox(agent, f[i]) for i in pred[j]) for j in range(self.k))

    def label(self, f) -> str:
        return "(" + ",".join(self.base.label(x) for x in f) + ")"

    @cached_property
    def _table(self):
        return product_table(tabulate(self.base), self.action)

    def table(self) -> TableHAO:
        return self._table[0]

    def encode(self, f) -> int:
        """Table index of a tuple element (base must be table-backed)."""
        base = tabulate(self.base)
        n = base.n
        out = 0
        for x in f:
            out = out * n + int(x)
        return out


def product_table(base: TableHAO, action: AlgebraAction) -> tuple[TableHAO, np.ndarray]:
    """Vectorized tables of the product algebra. Row order matches ``ProductAlgebra.elements``."""
    n, k = base.n, len(action.states)
    coords = np.array(list(itertools.product(range(n), repeat=k)), dtype=np.int64).reshape(-1, k)
    weights = n ** np.arange(k - 1, -1, -1, dtype=np.int64)

    def binary(tab):
        out = np.zeros((len(coords), len(coords)), dtype=np.int64)
        for j in range(k):
            c = coords[:, j]
            out += tab[c[:, None], c[None, :]] * weights[j]
        return out

    def lifted(unary, adj, start, comb):
        out = np.zeros(len(coords), dtype=np.int64)
        for j in range(k):
            acc = np.full(len(coords), start, dtype=np.int64)
            for i in adj[j]:
                acc = comb[acc, unary[coords[:, i]]]
            out += acc * weights[j]
        return out

    leq = np.ones((len(coords), len(coords)), dtype=bool)
    for j in range(k):
        c = coords[:, j]
        leq &= base.leq_t[c[:, None], c[None, :]]
    meet, join, imp = binary(base.meet_t), binary(base.join_t), binary(base.imp_t)
    labels = tuple("(" + ",".join(base.labels[x] for x in row) + ")" for row in coords)
    lat = FiniteLattice(labels, leq, meet, join, int(base.bot * weights.sum()), int(base.top * weights.sum()))
    empty = [[] for _ in range(k)]
    dia, box, bdia, bbox = {}, {}, {}, {}
    for a in base.agents:
        succ = action.succ_idx.get(a, empty)
        pred = action.pred_idx.get(a, empty)
        dia[a] = lifted(base.dia_t[a], succ, base.bot, base.join_t)
        box[a] = lifted(base.box_t[a], succ, base.top, base.meet_t)
        if base.has_tense:
            bdia[a] = lifted(base.bdia_t[a], pred, base.bot, base.join_t)
            bbox[a] = lifted(base.bbox_t[a], pred, base.top, base.meet_t)
    tense = base.has_tense
    return TableHAO(lat, imp, dia, box, bdia if tense else None, bbox if tense else None), coords


class QuotientAlgebra(FiniteHAO):
    """Product algebra modulo f ~ g iff f & Pre = g & Pre, carried by representatives below Pre."""

    def __init__(self, product: ProductAlgebra):
        self.product = product
        self.agents = product.agents
        self.pre = product.pre

    @cached_property
    def elements(self) -> list[tuple]:
        base = self.product.base
        downs = [[x for x in base.elements if base.leq(x, p)] for p in self.pre]
        return list(itertools.product(*downs))

    @property
    def bot(self):
        return self.product.bot

    @property
    def top(self):
        return self.pre

    def project(self, f):
        """pi: the class of a product element, given by its representative."""
        return self.product.meet(f, self.pre)

    def i_prime(self, c):
        """The canonical representative of class ``c`` inside the product."""
        if not self.product.leq(c, self.pre):
            raise AlgebraError(f"{c!r} is not a class representative")
        return c

    def equivalent(self, f, g) -> bool:
        return self.project(f) == self.project(g)

    def leq(self, b, c) -> bool:
        return self.product.leq(b, c)

    def meet(self, b, c):
        return self.product.meet(b, c)

    def join(self, b, c):
        return self.product.join(b, c)

    def imp(self, b, c):
        P = self.product
        return P.meet(self.pre, P.imp(b, c))

    def dia(self, agent, b):
        P = self.product
        return P.meet(P.dia(agent, P.meet(b, self.pre)), self.pre)

    def box(self, agent, b):
        P = self.product
        return P.meet(self.pre, P.box(agent, P.imp(self.pre, b)))

    @property
    def has_tense(self) -> bool:
        return self.product.has_tense

    def bdia(self, agent, b):
        P = self.product
        return P.meet(P.bdia(agent, P.meet(b, self.pre)), self.pre)

    def bbox(self, agent, b):
        P = self.product
        return P.meet(self.pre, P.bbox(agent, P.imp(self.pre, b)))

    def label(self, b) -> str:
        return self.product.label(b)

    @cached_property
    def _table(self):
        ptab, coords = self.product._table
        pre = self.product.encode(self.pre)
        return quotient_table(ptab, pre)

    def table(self) -> TableHAO:
        return self._table[0]

    def table_reps(self) -> np.ndarray:
        """Product-table indices of the representatives, in quotient-table order."""
        return self._table[1]


def quotient_table(ptab: TableHAO, pre: int) -> tuple[TableHAO, np.ndarray]:
    reps = np.nonzero(ptab.leq_t[:, pre])[0]
    pos = np.full(ptab.n, -1, dtype=np.int64)
    pos[reps] = np.arange(len(reps))
    ix = np.ix_(reps, reps)
    m = ptab.meet_t
    lat = FiniteLattice(
        tuple(ptab.labels[r] for r in reps), ptab.leq_t[ix], pos[m[ix]], pos[ptab.join_t[ix]],
        int(pos[ptab.bot]), int(pos[pre]),
    )
    imp = pos[m[ptab.imp_t[ix], pre]]
    dia, box, bdia, bbox = {}, {}, {}, {}
    for a in ptab.agents:
        dia[a] = pos[m[ptab.dia_t[a][reps], pre]]
        box[a] = pos[m[pre, ptab.box_t[a][ptab.imp_t[pre, reps]]]]
        if ptab.has_tense:
            bdia[a] = pos[m[ptab.bdia_t[a][reps], pre]]
            bbox[a] = pos[m[pre, ptab.bbox_t[a][ptab.imp_t[pre, reps]]]]
    tense = ptab.has_tense
    out = TableHAO(lat, imp, dia, box, bdia if tense else None, bbox if tense else None)
    if (out.imp_t < 0).any() or any((t < 0).any() for t in out.dia_t.values()):
        raise AlgebraError("quotient operations left the representative set")
    return out, reps


def product_algebra(base: FiniteHAO, action: AlgebraAction) -> ProductAlgebra:
    return ProductAlgebra(base, action)


def quotient_algebra(product: ProductAlgebra) -> QuotientAlgebra:
    return QuotientAlgebra(product)


def i_prime(q: QuotientAlgebra, c):
    return q.i_prime(c)


def pi(q: QuotientAlgebra, f):
    return q.project(f)


def pi_k(p: ProductAlgebra, f, state: str):
    return p.coord(f, state)


# --------------------------------------------------------- congruence check


def congruence_failures(ptab: TableHAO, pre: int, limit: int = 3) -> list[tuple]:
    """Exhaustive check that f ~ g implies op(f, h) ~ op(g, h) for the HA operations."""
    cls = ptab.meet_t[:, pre]
    # the representative of each element's class stands in for all its members
    rep_of = cls
    out = []
    for name, tab in (("meet", ptab.meet_t), ("join", ptab.join_t), ("imp", ptab.imp_t)):
        c = cls[tab]
        for side, got, want in (("left", c, c[rep_of]), ("right", c.T, c.T[rep_of])):
            bad = np.argwhere(got != want)
            out += [(name, side, tuple(map(int, w))) for w in bad[:limit]]
    return out
