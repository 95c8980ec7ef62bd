"""The three-agent cards scenario: figure regression and semantic entailment check.

The entailment E(other?) |- [alpha][beta] box_c G_a is checked semantically
(every world satisfying the premise satisfies the conclusion) on models
satisfying aut and one globally. Classical models up to three worlds are
enumerated exhaustively through a vectorized evaluator that is cross-checked
against the generic one; intuitionistic models are sampled.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field

import numpy as np

from . import bank
from .io import data_path, load_actions, load_model
from .relational import Frame, Model, coproduct_model, extension_mask, product_update
from .syntax import ActionEnv, Formula, parse_formula

AGENTS = ("a", "b", "c")
CONCLUSION = "[alpha][beta] box c Ga"


def other_formula() -> str:
    parts = []
    for i in AGENTS:
        dias = " & ".join(f"dia {i} G{h}" for h in AGENTS if h != i)
        parts.append(f"(W{i} -> {dias})")
    return " & ".join(parts)


def aut_formula() -> str:
    return " & ".join(f"((W{i} -> false) <-> G{i})" for i in AGENTS)


def one_formula() -> str:
    return " | ".join("(G{} & {})".format(i, " & ".join(f"W{h}" for h in AGENTS if h != i)) for i in AGENTS)


@dataclass
class CardsFormulas:
    env: ActionEnv
    premise: Formula
    conclusion: Formula
    aut: Formula
    one: Formula


def cards_formulas(env: ActionEnv | None = None) -> CardsFormulas:
    env = env or load_actions(data_path("cards_actions.json"))
    p = lambda s: parse_formula(s, env)
    return CardsFormulas(env, p(f"E ({other_formula()})"), p(CONCLUSION), p(aut_formula()), p(one_formula()))


# ------------------------------------------------------------ figure checks


def _edges(model: Model, agent: str) -> set[frozenset]:
    return {frozenset((v, w)) for v, w in model.frame.rel[agent] if v != w}


def figure_failures(model: Model | None = None, env: ActionEnv | None = None) -> list[str]:
    """Structural comparison of the updates of the shipped model with the expected ones."""
    model = model or load_model(data_path("cards_model.json"))
    env = env or load_actions(data_path("cards_actions.json"))
    alpha, beta = env["alpha"], env["beta"]
    out = []
    name = {frozenset(ws): p for p, ws in model.val.items() if p.startswith("G") and len(ws) == 1}
    holder = {next(iter(ws)): p for ws, p in name.items()}
    inter = coproduct_model(model, alpha)
    if inter.frame.n != 6:
        out.append(f"intermediate structure has {inter.frame.n} worlds, expected 6")
    upd, _ = product_update(model, alpha, env)
    by_holder = {(holder[w], k) for w, k in upd.frame.worlds}
    if by_holder != {("Ga", "k"), ("Gb", "l"), ("Gc", "l")}:
        out.append(f"M^alpha worlds are {sorted(by_holder)}")
    else:
        at = {(holder[w], k): (w, k) for w, k in upd.frame.worlds}
        want = {
            "a": {frozenset((at["Gb", "l"], at["Gc", "l"]))},
            "b": set(),
            "c": {frozenset((at["Ga", "k"], at["Gb", "l"]))},
        }
        for agent, edges in want.items():
            if _edges(upd, agent) != edges:
                out.append(f"M^alpha {agent}-edges differ from the expected ones")
    final, _ = product_update(upd, beta, env)
    if final.frame.n != 1:
        out.append(f"(M^alpha)^beta has {final.frame.n} worlds, expected 1")
    elif "Ga" not in final.atoms_true_at(final.frame.worlds[0]):
        out.append("the surviving world does not satisfy Ga")
    return out


# ---------------------------------------------------- classical fast path


def _tables(n: int):
    """dia[r][m] and box[r][m] for every relation code r and world mask m on n worlds."""
    codes = 1 << (n * n)
    full = (1 << n) - 1
    dia = np.zeros((codes, 1 << n), dtype=np.uint8)
    box = np.zeros((codes, 1 << n), dtype=np.uint8)
    for r in range(codes):
        succ = [(r >> (i * n)) & full for i in range(n)]
        for m in range(1 << n):
            dia[r, m] = sum(1 << i for i in range(n) if succ[i] & m)
            box[r, m] = sum(1 << i for i in range(n) if not succ[i] & ~m & full)
    return dia, box


def classical_masks(n: int, holder: tuple[int, ...], ra: np.ndarray, rb: np.ndarray, rc: np.ndarray,
                    tables=None) -> tuple[np.ndarray, np.ndarray]:
    """Premise and conclusion extensions (as world masks) for classical models given by relation codes.

    ``holder[w]`` is the index of the agent holding the green card at world w;
    relation codes use bit ``i*n + j`` for the pair (i, j). Arrays broadcast.
    """
    dia, box = tables or _tables(n)
    full = (1 << n) - 1
    G = [sum(1 << w for w in range(n) if holder[w] == i) for i in range(3)]
    W = [full & ~g for g in G]
    rels = (ra, rb, rc)
    other = np.full(np.broadcast(ra, rb, rc).shape, full, dtype=np.uint8)
    for i, r in enumerate(rels):
        o = np.full(r.shape, full, dtype=np.uint8)
        for h in range(3):
            if h != i:
                o &= dia[r, G[h]]
        other &= (~W[i] & full) | o
    prem = np.full(other.shape, full, dtype=np.uint8)
    for r in rels:
        prem &= box[r, other]
    # worlds of W_a whose a-successors inside W_a all share their holder
    s = np.zeros(ra.shape, dtype=np.uint8)
    for w in range(n):
        if holder[w] == 0:
            continue
        succ = (ra >> (w * n)) & full
        s |= np.where((succ & W[0] & ~G[holder[w]]) == 0, 1 << w, 0).astype(np.uint8)
    concl = (~G[0] & full) | box[rc, full & ~s]
    return prem.astype(np.uint8), np.asarray(concl, dtype=np.uint8)


def classical_counterexamples(n: int, tables=None, limit: int = 10) -> tuple[int, int, list[tuple]]:
    """Exhaustive scan over every classical model on n worlds satisfying aut and one.

    Returns (models scanned, premise worlds seen, counterexamples as (holder, ra, rb, rc, world-mask)).
    """
    tables = tables or _tables(n)
    codes = 1 << (n * n)
    ra = np.arange(codes, dtype=np.int64)[:, None]
    rc = np.arange(codes, dtype=np.int64)[None, :]
    found = []
    scanned = premised = 0
    for holder in itertools.product(range(3), repeat=n):
        for rb in range(codes):
            prem, concl = classical_masks(n, holder, ra, np.int64(rb), rc, tables)
            bad = prem & ~concl
            scanned += bad.size
            premised += int(np.unpackbits(prem).sum())
            if bad.any() and len(found) < limit:
                for x, y in zip(*np.nonzero(bad)):
                    found.append((holder, int(x), rb, int(y), int(bad[x, y])))
    return scanned, premised, found


def classical_cards_model(n: int, holder: tuple[int, ...], ra: int, rb: int, rc: int) -> Model:
    rel = {a: bank.relation_pairs(n, r) for a, r in zip(AGENTS, (ra, rb, rc))}
    fr = Frame.classical(tuple(range(n)), rel)
    val = {}
    for i, a in enumerate(AGENTS):
        g = frozenset(w for w in range(n) if holder[w] == i)
        val[f"G{a}"] = g
        val[f"W{a}"] = frozenset(range(n)) - g
    return Model(fr, val, "classical")


def cross_check(samples: int = 300, seed: int = 0, formulas: CardsFormulas | None = None) -> list[str]:
    """Compare the vectorized masks with the generic evaluator on all 1-world and sampled larger models."""
    f = formulas or cards_formulas()
    rng = random.Random(seed)
    cases = [(1, h, ra, rb, rc) for h in itertools.product(range(3), repeat=1)
             for ra, rb, rc in itertools.product(range(2), repeat=3)]
    for _ in range(samples):
        n = rng.choice((2, 3))
        cases.append((n, tuple(rng.randrange(3) for _ in range(n)),
                      *(rng.getrandbits(n * n) for _ in range(3))))
    tabs = {n: _tables(n) for n in (1, 2, 3)}
    out = []
    for n, h, ra, rb, rc in cases:
        prem, concl = classical_masks(n, h, np.int64(ra), np.int64(rb), np.int64(rc), tabs[n])
        m = classical_cards_model(n, h, ra, rb, rc)
        if int(prem) != extension_mask(m, f.env, f.premise) or int(concl) != extension_mask(m, f.env, f.conclusion):
            out.append(f"mismatch on n={n} holder={h} codes={(ra, rb, rc)}")
    return out


# ----------------------------------------------------------- IK sampling


def _components(frame: Frame) -> list[int]:
    comp = list(range(frame.n))
    def root(i):
        while comp[i] != i:
            i = comp[i]
        return i
    for v, w in frame.order:
        a, b = root(frame.index[v]), root(frame.index[w])
        comp[a] = b
    return [root(i) for i in range(frame.n)]


def random_ik_cards_model(rng: random.Random, max_worlds: int = 3) -> Model:
    """Random IK frame with a green-card holder per order component (so aut and one hold)."""
    fr = bank.random_ik_frame(max_worlds, AGENTS, rng)
    comp = _components(fr)
    pick = {c: rng.randrange(3) for c in sorted(set(comp))}
    val = {}
    for i, a in enumerate(AGENTS):
        g = frozenset(w for w, c in zip(fr.worlds, comp) if pick[c] == i)
        val[f"G{a}"] = g
        val[f"W{a}"] = frozenset(fr.worlds) - g
    return bank.model_of(fr, val)


@dataclass
class CardsReport:
    figure_failures: list[str] = field(default_factory=list)
    cross_check_failures: list[str] = field(default_factory=list)
    classical_models: int = 0
    ik_models: int = 0
    skipped: int = 0
    premise_worlds: int = 0
    counterexamples: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not (self.figure_failures or self.cross_check_failures or self.counterexamples)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "method": "semantic entailment check on models satisfying aut and one globally",
            "figure_failures": self.figure_failures,
            "cross_check_failures": self.cross_check_failures,
            "classical_models": self.classical_models,
            "ik_models": self.ik_models,
            "skipped": self.skipped,
            "premise_worlds": self.premise_worlds,
            "counterexamples": self.counterexamples,
            "seconds": round(self.seconds, 3),
        }


def run_cards(max_worlds: int = 3, ik_samples: int = 500, seed: int = 0, cross_samples: int = 300) -> CardsReport:
    t0 = time.perf_counter()
    rep = CardsReport()
    rep.figure_failures = figure_failures()
    f = cards_formulas()
    rep.cross_check_failures = cross_check(cross_samples, seed, f)
    for n in range(1, max_worlds + 1):
        scanned, premised, bad = classical_counterexamples(n)
        rep.classical_models += scanned
        rep.premise_worlds += premised
        rep.counterexamples += [f"classical n={n} holder={h} codes={(a, b, c)} worlds={m:b}" for h, a, b, c, m in bad]
    rng = random.Random(seed)
    while rep.ik_models < ik_samples:
        m = random_ik_cards_model(rng, max_worlds)
        full = m.frame.full
        if extension_mask(m, f.env, f.aut) != full or extension_mask(m, f.env, f.one) != full:
            rep.skipped += 1
            continue
        rep.ik_models += 1
        prem = extension_mask(m, f.env, f.premise)
        rep.premise_worlds += bin(prem).count("1")
        if prem & ~extension_mask(m, f.env, f.conclusion):
            rep.counterexamples.append(f"ik model val={dict(m.val)} order={sorted(m.frame.order)}")
    rep.seconds = time.perf_counter() - t0
    return rep
