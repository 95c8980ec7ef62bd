"""Enumeration and seeded sampling of posets, IK relations, frames, models and actions."""
from __future__ import annotations

import itertools
import random
from functools import lru_cache
from typing import Iterator, Sequence

from .relational import Frame, Model, bits, is_equivalence, is_ik_frame
from .syntax import (
    BOT, TOP, ActionEnv, ActionRef, ActionStructure, And, Atom, Box, Dia, DynBox, DynDia, Formula, Imp, Or, neg,
)

# ------------------------------------------------------------------ posets


def _closed(n: int, up: list[int]) -> bool:
    return all(up[j] & ~up[i] == 0 for i in range(n) for j in bits(up[i]))


def _canonical(n: int, up: list[int]) -> tuple:
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted((perm[i], perm[j]) for i in range(n) for j in bits(up[i])))
        if best is None or key < best:
            best = key
    return best


@lru_cache(maxsize=None)
def posets(n: int) -> tuple[tuple[int, ...], ...]:
    """Partial orders on {0..n-1} up to isomorphism, as up-set masks.

    Every poset has a linear extension, so it suffices to look at orders
    contained in the natural order i < j.
    """
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    seen, out = set(), []
    for m in range(1 << len(pairs)):
        up = [1 << i for i in range(n)]
        for b, (i, j) in enumerate(pairs):
            if m >> b & 1:
                up[i] |= 1 << j
        if not _closed(n, up):
            continue
        key = _canonical(n, up)
        if key not in seen:
            seen.add(key)
            out.append(tuple(up))
    return tuple(out)


def order_pairs(up: Sequence[int]) -> frozenset:
    return frozenset((i, j) for i in range(len(up)) for j in bits(up[i]))


def relation_pairs(n: int, m: int) -> frozenset:
    """Relation encoded row-major: bit i*n+j means i R j."""
    return frozenset((i, j) for i in range(n) for j in range(n) if m >> (i * n + j) & 1)


def _frame(up: Sequence[int], rels: dict[str, int]) -> Frame:
    n = len(up)
    return Frame(tuple(range(n)), order_pairs(up), {a: relation_pairs(n, m) for a, m in rels.items()})


@lru_cache(maxsize=None)
def ik_relations(up: tuple[int, ...]) -> tuple[int, ...]:
    """All relation codes satisfying the IK interaction conditions on this poset (n <= 3)."""
    n = len(up)
    if n > 3:
        raise ValueError("exhaustive relation enumeration is limited to 3 points")
    return tuple(m for m in range(1 << (n * n)) if is_ik_frame(_frame(up, {"a": m})))


def random_ik_relation(up: tuple[int, ...], rng: random.Random, tries: int = 400) -> int:
    """Rejection-sample an IK relation; density is drawn per attempt."""
    n = len(up)
    if n <= 3:
        return rng.choice(ik_relations(up))
    for _ in range(tries):
        p = rng.random()
        m = sum(1 << b for b in range(n * n) if rng.random() < p)
        if is_ik_frame(_frame(up, {"a": m})):
            return m
    return 0


@lru_cache(maxsize=None)
def equivalence_relations(up: tuple[int, ...]) -> tuple[int, ...]:
    """Equivalence relations that are IK relations on this poset (MIPC frames)."""
    n = len(up)
    out = []
    for labels in itertools.product(range(n), repeat=n):
        if any(labels[i] > max(labels[:i], default=-1) + 1 for i in range(n)):
            continue  # restricted growth strings enumerate each partition once
        m = sum(1 << (i * n + j) for i in range(n) for j in range(n) if labels[i] == labels[j])
        if is_ik_frame(_frame(up, {"a": m})):
            out.append(m)
    return tuple(out)


# ------------------------------------------------------------------ frames


def ik_frame_family(max_worlds: int, agents: Sequence[str], seed: int, samples_per_poset: int,
                    exhaustive_upto: int = 3) -> Iterator[Frame]:
    """Frames used by the closure and duality suites.

    Posets up to ``exhaustive_upto`` points pair every IK relation for the
    first agent with a seeded relation for the others; larger posets get
    ``samples_per_poset`` seeded relation tuples. Each poset also contributes
    one MIPC frame per admissible equivalence relation.
    """
    rng = random.Random(seed)
    first, rest = agents[0], list(agents[1:])
    for n in range(1, max_worlds + 1):
        for up in posets(n):
            if n <= exhaustive_upto:
                for m in ik_relations(up):
                    rels = {first: m}
                    rels.update({a: random_ik_relation(up, rng) for a in rest})
                    yield _frame(up, rels)
            else:
                for _ in range(samples_per_poset):
                    rels = {a: random_ik_relation(up, rng) for a in agents}
                    yield _frame(up, rels)
            for m in equivalence_relations(up):
                rels = {first: m}
                rels.update({a: rng.choice(equivalence_relations(up)) for a in rest})
                yield _frame(up, rels)


def is_mipc(frame: Frame) -> bool:
    return all(is_equivalence(frame, a) for a in frame.agents)


def random_ik_frame(max_worlds: int, agents: Sequence[str], rng: random.Random) -> Frame:
    n = rng.randint(1, max_worlds)
    up = rng.choice(posets(n))
    return _frame(up, {a: random_ik_relation(up, rng) for a in agents})


def classical_frames(n: int, agents: Sequence[str]) -> Iterator[Frame]:
    worlds = tuple(range(n))
    for codes in itertools.product(range(1 << (n * n)), repeat=len(agents)):
        yield Frame.classical(worlds, {a: relation_pairs(n, m) for a, m in zip(agents, codes)})


def random_classical_frame(n: int, agents: Sequence[str], rng: random.Random) -> Frame:
    worlds = tuple(range(n))
    return Frame.classical(worlds, {a: relation_pairs(n, rng.getrandbits(n * n)) for a in agents})


# -------------------------------------------------------------- valuations


def downset_masks(frame: Frame) -> list[int]:
    return [m for m in range(1 << frame.n) if frame.is_downset(m)]


def valuations(frame: Frame, atoms: Sequence[str]) -> Iterator[dict]:
    ds = downset_masks(frame)
    for combo in itertools.product(ds, repeat=len(atoms)):
        yield {p: frame.subset(m) for p, m in zip(atoms, combo)}


def random_valuation(frame: Frame, atoms: Sequence[str], rng: random.Random) -> dict:
    ds = downset_masks(frame)
    return {p: frame.subset(rng.choice(ds)) for p in atoms}


def model_of(frame: Frame, val: dict) -> Model:
    kind = "classical" if frame.is_discrete else ("mipc" if is_mipc(frame) else "ik")
    return Model(frame, val, kind)


# ------------------------------------------------------------ model banks


def classical_bank(atoms: Sequence[str], agents: Sequence[str], max_worlds: int, seed: int,
                   exhaustive_upto: int = 2, samples: int = 200) -> tuple[list[Model], bool]:
    """All classical models up to ``exhaustive_upto`` worlds, seeded samples beyond."""
    rng = random.Random(seed)
    out = []
    for n in range(1, min(max_worlds, exhaustive_upto) + 1):
        for fr in classical_frames(n, agents):
            out.extend(Model(fr, v, "classical") for v in valuations(fr, atoms))
    for n in range(exhaustive_upto + 1, max_worlds + 1):
        for _ in range(samples):
            fr = random_classical_frame(n, agents, rng)
            out.append(Model(fr, random_valuation(fr, atoms, rng), "classical"))
    return out, max_worlds <= exhaustive_upto


def ik_bank(atoms: Sequence[str], agents: Sequence[str], max_worlds: int, seed: int,
            exhaustive_upto: int = 2, samples: int = 200) -> tuple[list[Model], bool]:
    """IK models over all posets; every relation tuple and valuation up to ``exhaustive_upto`` points."""
    rng = random.Random(seed)
    out = []
    for n in range(1, max_worlds + 1):
        for up in posets(n):
            if n <= exhaustive_upto:
                for codes in itertools.product(ik_relations(up), repeat=len(agents)):
                    fr = _frame(up, dict(zip(agents, codes)))
                    out.extend(model_of(fr, v) for v in valuations(fr, atoms))
            else:
                for _ in range(samples):
                    fr = _frame(up, {a: random_ik_relation(up, rng) for a in agents})
                    out.append(model_of(fr, random_valuation(fr, atoms, rng)))
    return out, max_worlds <= exhaustive_upto


def regression_bank(atoms: Sequence[str], agents: Sequence[str], max_worlds: int = 3, seed: int = 0,
                    samples: int = 60) -> tuple[list[Model], bool]:
    """Mixed classical and IK bank used by the equivalence oracle.

    Exhaustive on one-point models and on two-point models with at most one
    agent and two atoms; seeded samples otherwise.
    """
    rng = random.Random(seed)
    small = len(agents) <= 1 and len(atoms) <= 2
    upto = 2 if small else 1
    cl, ex1 = classical_bank(atoms, agents, max_worlds, rng.randrange(1 << 30), upto, samples)
    ik, ex2 = ik_bank(atoms, agents, max_worlds, rng.randrange(1 << 30), upto, samples)
    return cl + ik, ex1 and ex2


# ----------------------------------------------------------------- actions


def all_action_shapes(states: Sequence[str], agents: Sequence[str]) -> Iterator[dict]:
    """Every assignment of a relation on ``states`` to each agent."""
    k = len(states)
    for codes in itertools.product(range(1 << (k * k)), repeat=len(agents)):
        yield {a: frozenset((states[i], states[j]) for i in range(k) for j in range(k)
                            if m >> (i * k + j) & 1) for a, m in zip(agents, codes)}


def random_action(name: str, agents: Sequence[str], pres: Sequence[Formula], rng: random.Random,
                  max_states: int = 2, equivalence: bool = False) -> ActionStructure:
    k = rng.randint(1, max_states)
    states = tuple(f"s{i}" for i in range(k))
    rel = {}
    for a in agents:
        if equivalence:
            cut = rng.randint(0, k)
            block = [0 if i < cut else 1 for i in range(k)]
            rel[a] = frozenset((states[i], states[j]) for i in range(k) for j in range(k) if block[i] == block[j])
        else:
            rel[a] = frozenset((states[i], states[j]) for i in range(k) for j in range(k) if rng.random() < 0.5)
    pre = {s: rng.choice(pres) for s in states}
    return ActionStructure(name, states, states[0], rel, pre)


def atomic_preconditions(atoms: Sequence[str]) -> list[Formula]:
    return [Atom(p) for p in atoms] + [TOP]


# ---------------------------------------------------------------- formulas


def random_formula(rng: random.Random, depth: int, atoms: Sequence[str], agents: Sequence[str],
                   refs: Sequence = (), leaf_bias: float = 0.2) -> Formula:
    """Random formula of depth at most ``depth``; dynamic nodes only when ``refs`` is given."""
    if depth <= 1 or rng.random() < leaf_bias:
        r = rng.random()
        if r < 0.8:
            return Atom(rng.choice(atoms))
        return BOT if r < 0.9 else TOP
    kinds = ["neg", "and", "or", "imp", "box", "dia"] + (["dynbox", "dyndia"] if refs else [])
    kind = rng.choice(kinds)
    sub = lambda: random_formula(rng, depth - 1, atoms, agents, refs, leaf_bias)
    if kind == "neg":
        return neg(sub())
    if kind in ("and", "or", "imp"):
        return {"and": And, "or": Or, "imp": Imp}[kind](sub(), sub())
    if kind in ("box", "dia"):
        return (Box if kind == "box" else Dia)(rng.choice(agents), sub())
    ref = rng.choice(refs)
    return (DynBox if kind == "dynbox" else DynDia)(ref, sub())


def random_env(rng: random.Random, agents: Sequence[str], atoms: Sequence[str], max_states: int = 2,
               nested: bool = True) -> ActionEnv:
    """Three actions: two with static preconditions, one whose precondition is dynamic."""
    def static_pre():
        return random_formula(rng, 2, atoms, agents)

    u = random_action("u", agents, [static_pre() for _ in range(3)], rng, max_states)
    v = random_action("v", agents, [static_pre() for _ in range(3)], rng, max_states)
    acts = {"u": u, "v": v}
    if nested:
        refs = [ActionRef("u", s) for s in u.states]
        pres = [DynDia(rng.choice(refs), Atom(rng.choice(atoms))),
                DynBox(rng.choice(refs), static_pre()), static_pre()]
        acts["w"] = random_action("w", agents, pres, rng, max_states)
    return ActionEnv(tuple(agents), acts)


def env_refs(env: ActionEnv) -> list[ActionRef]:
    return [ActionRef(n, s if s != a.designated else None) for n, a in env.actions.items() for s in a.states]
