"""Complex algebras of frames, prime structures of finite HAOs, and isomorphism search."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import networkx as nx
import numpy as np

from .algebra import AlgebraError, FiniteLattice, TableHAO, check_fsa, tense_adjoints
from .relational import Frame, bits, check_ik_frame


class ComplexAlgebra(TableHAO):
    """Downset algebra of a frame. Element i is the downset ``masks[i]``."""

    def __init__(self, frame: Frame, masks: list[int], lattice, imp, dia, box):
        super().__init__(lattice, imp, dia, box)
        self.frame = frame
        self.masks = masks
        self.position = {m: i for i, m in enumerate(masks)}

    def element(self, worlds) -> int:
        return self.position[self.frame.mask(worlds)]

    def worlds_of(self, x: int) -> frozenset:
        return self.frame.subset(self.masks[x])


def downsets(frame: Frame) -> list[int]:
    out = [m for m in range(1 << frame.n) if frame.is_downset(m)]
    return sorted(out, key=lambda m: (bin(m).count("1"), m))


def _set_label(frame: Frame, m: int) -> str:
    return "{" + ",".join(str(frame.worlds[i]) for i in bits(m)) + "}"


def complex_algebra(frame: Frame, check: bool = True) -> ComplexAlgebra:
    """The algebra of downsets with R-preimage diamond and box along >= ; R."""
    if check:
        rep = check_ik_frame(frame)
        if not rep.ok:
            raise AlgebraError("not an IK-frame: " + "; ".join(map(str, rep.violations)))
    masks = downsets(frame)
    pos = {m: i for i, m in enumerate(masks)}
    n = len(masks)
    arr = np.array(masks, dtype=np.int64)
    leq = (arr[:, None] & ~arr[None, :]) == 0
    meet = np.vectorize(lambda a, b: pos[a & b])(arr[:, None], arr[None, :]) if n else arr
    join = np.vectorize(lambda a, b: pos[a | b])(arr[:, None], arr[None, :]) if n else arr
    imp = np.array([[pos[frame.imp(a, b)] for b in masks] for a in masks], dtype=np.int64)
    labels = tuple(_set_label(frame, m) for m in masks)
    lat = FiniteLattice(labels, leq, meet.astype(np.int64), join.astype(np.int64), pos[0], pos[frame.full])
    dia = {a: np.array([pos[frame.dia(a, m)] for m in masks], dtype=np.int64) for a in frame.agents}
    box = {a: np.array([pos[frame.box(a, m)] for m in masks], dtype=np.int64) for a in frame.agents}
    return ComplexAlgebra(frame, masks, lat, imp, dia, box)


# ------------------------------------------------------------ primes


def join_primes(alg: TableHAO) -> list[int]:
    """Completely join-prime elements.

    In a finite lattice it suffices to test binary joins together with x != bot.
    Candidates are first narrowed to join-irreducibles, which contain all primes.
    """
    leq, join = alg.leq_t, alg.join_t
    out = []
    for x in range(alg.n):
        if x == alg.bot:
            continue
        below = np.nonzero(leq[:, x])[0]
        acc = alg.bot
        for y in below:
            if y != x:
                acc = int(join[acc, y])
        if acc == x:
            continue
        lx = leq[x]
        if (lx[join] & ~lx[:, None] & ~lx[None, :]).any():
            continue
        out.append(x)
    return out


def meet_primes(alg: TableHAO) -> list[int]:
    leq, meet = alg.leq_t, alg.meet_t
    out = []
    for x in range(alg.n):
        if x == alg.top:
            continue
        above = np.nonzero(leq[x])[0]
        acc = alg.top
        for y in above:
            if y != x:
                acc = int(meet[acc, y])
        if acc == x:
            continue
        gx = leq[:, x]
        if (gx[meet] & ~gx[:, None] & ~gx[None, :]).any():
            continue
        out.append(x)
    return out


def kappa(alg: TableHAO, x: int) -> int:
    """Join of everything x is not below; maps join-primes to meet-primes."""
    out = alg.bot
    for y in np.nonzero(~alg.leq_t[x, :])[0]:
        out = int(alg.join_t[out, y])
    return out


def lam(alg: TableHAO, y: int) -> int:
    """Meet of everything not below y; inverse of kappa on primes."""
    out = alg.top
    for x in np.nonzero(~alg.leq_t[:, y])[0]:
        out = int(alg.meet_t[out, x])
    return out


def prime_structure(alg: TableHAO, check: bool = True) -> Frame:
    """Frame on the join-primes with the restricted order and x R y iff x <= dia y and y <= bdia x."""
    if check:
        rep = check_fsa(alg)
        if not rep.ok:
            raise AlgebraError(f"not an FSA: violates {sorted(rep.conditions())}")
    if not alg.has_tense:
        alg = tense_adjoints(alg)
    primes = join_primes(alg)
    lab = alg.labels
    worlds = tuple(lab[p] for p in primes)
    order = frozenset((lab[p], lab[q]) for p in primes for q in primes if alg.leq_t[p, q])
    rel = {}
    for a in alg.agents:
        d, bd = alg.dia_t[a], alg.bdia_t[a]
        rel[a] = frozenset((lab[p], lab[q]) for p in primes for q in primes
                           if alg.leq_t[p, d[q]] and alg.leq_t[q, bd[p]])
    return Frame(worlds, order, rel)


# --------------------------------------------------------- isomorphisms


@dataclass(frozen=True)
class IsoWitness:
    forward: Mapping
    backward: Mapping


class SignatureError(ValueError):
    pass


def frame_graph(frame: Frame, val: Mapping[str, frozenset] | None = None) -> nx.DiGraph:
    g = nx.DiGraph()
    for w in frame.worlds:
        atoms = frozenset(p for p, ws in (val or {}).items() if w in ws)
        g.add_node(w, atoms=atoms)
    labels: dict[tuple, set] = {}
    for v, w in frame.order:
        if v != w:
            labels.setdefault((v, w), set()).add("<=")
    for a, pairs in frame.rel.items():
        for v, w in pairs:
            labels.setdefault((v, w), set()).add("R:" + a)
    for (v, w), ls in labels.items():
        g.add_edge(v, w, labels=frozenset(ls))
    return g


def algebra_graph(alg: TableHAO) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(alg.n), atoms=frozenset())
    labels: dict[tuple, set] = {}
    for x, y in zip(*np.nonzero(alg.leq_t)):
        if x != y:
            labels.setdefault((int(x), int(y)), set()).add("<=")
    for a in alg.agents:
        for x in range(alg.n):
            labels.setdefault((x, int(alg.dia_t[a][x])), set()).add("dia:" + a)
            labels.setdefault((x, int(alg.box_t[a][x])), set()).add("box:" + a)
    for (x, y), ls in labels.items():
        g.add_edge(x, y, labels=frozenset(ls))
    return g


def _match(g1: nx.DiGraph, g2: nx.DiGraph):
    if g1.number_of_nodes() != g2.number_of_nodes() or g1.number_of_edges() != g2.number_of_edges():
        return None
    gm = nx.algorithms.isomorphism.DiGraphMatcher(
        g1, g2,
        node_match=lambda a, b: a["atoms"] == b["atoms"],
        edge_match=lambda a, b: a["labels"] == b["labels"],
    )
    for m in gm.isomorphisms_iter():
        return m
    return None


def verify_frame_iso(f1: Frame, f2: Frame, fwd: Mapping, val1=None, val2=None) -> bool:
    if set(fwd) != set(f1.worlds) or set(fwd.values()) != set(f2.worlds) or len(f1.worlds) != len(f2.worlds):
        return False
    if {(fwd[v], fwd[w]) for v, w in f1.order} != set(f2.order):
        return False
    for a in set(f1.rel) | set(f2.rel):
        if {(fwd[v], fwd[w]) for v, w in f1.rel.get(a, ())} != set(f2.rel.get(a, ())):
            return False
    if val1 is not None or val2 is not None:
        val1, val2 = val1 or {}, val2 or {}
        for p in set(val1) | set(val2):
            if {fwd[w] for w in val1.get(p, ())} != set(val2.get(p, ())):
                return False
    return True


def verify_algebra_iso(a1: TableHAO, a2: TableHAO, fwd: Mapping) -> bool:
    n = a1.n
    if a2.n != n or sorted(fwd.values()) != list(range(n)):
        return False
    f = np.array([fwd[x] for x in range(n)])
    if not (a1.leq_t == a2.leq_t[np.ix_(f, f)]).all():
        return False
    for t1, t2 in ((a1.meet_t, a2.meet_t), (a1.join_t, a2.join_t), (a1.imp_t, a2.imp_t)):
        if not (f[t1] == t2[np.ix_(f, f)]).all():
            return False
    if set(a1.agents) != set(a2.agents):
        return False
    for a in a1.agents:
        if not (f[a1.dia_t[a]] == a2.dia_t[a][f]).all() or not (f[a1.box_t[a]] == a2.box_t[a][f]).all():
            return False
    return True


def find_isomorphism(x, y, val_x=None, val_y=None) -> IsoWitness | None:
    """Isomorphism between two frames (optionally with valuations) or two table algebras.

    The candidate map comes from a VF2 matcher and is re-verified against
    every relation and operation before it is returned.
    """
    if isinstance(x, Frame) and isinstance(y, Frame):
        if set(x.rel) != set(y.rel):
            raise SignatureError("frames have different agent sets")
        m = _match(frame_graph(x, val_x), frame_graph(y, val_y))
        if m is None:
            return None
        if not verify_frame_iso(x, y, m, val_x, val_y):
            raise AssertionError("matcher returned a map that is not an isomorphism")
    elif isinstance(x, TableHAO) and isinstance(y, TableHAO):
        if set(x.agents) != set(y.agents):
            raise SignatureError("algebras have different agent sets")
        m = _match(algebra_graph(x), algebra_graph(y))
        if m is None:
            return None
        if not verify_algebra_iso(x, y, m):
            raise AssertionError("matcher returned a map that is not an isomorphism")
    else:
        raise SignatureError(f"cannot compare {type(x).__name__} with {type(y).__name__}")
    return IsoWitness(dict(m), {v: k for k, v in m.items()})


def brute_force_frame_iso(x: Frame, y: Frame) -> dict | None:
    """Permutation search; only for tiny frames, used to cross-check the matcher."""
    if len(x.worlds) != len(y.worlds):
        return None
    for perm in itertools.permutations(y.worlds):
        fwd = dict(zip(x.worlds, perm))
        if verify_frame_iso(x, y, fwd):
            return fwd
    return None
