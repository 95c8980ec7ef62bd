"""Property suites run by ``ieak verify`` and by the acceptance tests."""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import bank
from .algebra import (
    AlgebraAction, ProductAlgebra, QuotientAlgebra, TableHAO, adjunction_failures, check_fsa,
    check_heyting, congruence_failures, tense_adjoints,
)
from .duality import (
    complex_algebra, find_isomorphism, join_primes, kappa, lam, meet_primes, prime_structure,
)
from .relational import (
    Frame, Model, check_ik_frame, extension_mask, is_ik_frame, product_frame,
    product_update, update_frame,
)
from .rewriter import RewriteError, equivalence_check, normalize
from .semantics import AlgebraicModel, eval_algebraic
from .syntax import (
    BOT, TOP, ActionEnv, ActionRef, ActionStructure, And, Atom, Box, Dia, DynBox, DynDia, Formula, Imp, Or,
    big_and, big_or, dynamic_depth, is_static, neg,
)

AGENTS = ("a", "b", "c", "d")


@dataclass(frozen=True)
class SuiteConfig:
    max_worlds: int = 4
    max_action_states: int = 2
    max_agents: int = 2
    max_formula_depth: int = 4
    random_seed: int = 0
    sample_count: int = 0  # 0 means the suite's own default

    def __post_init__(self):
        for k, v in asdict(self).items():
            if k not in ("random_seed", "sample_count") and v < 1:
                raise ValueError(f"{k} must be at least 1")
        if self.sample_count < 0:
            raise ValueError("sample_count must be non-negative")
        if self.max_agents > len(AGENTS):
            raise ValueError(f"at most {len(AGENTS)} agents are supported")
        if self.max_worlds > 4:
            raise ValueError("frame families are limited to 4 worlds")

    @property
    def agents(self) -> tuple[str, ...]:
        return AGENTS[: self.max_agents]

    def samples(self, default: int) -> int:
        return self.sample_count or default


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    failure_count: int = 0
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def fail(self, msg: str) -> None:
        self.failure_count += 1
        if len(self.failures) < 50:
            self.failures.append(msg)

    def count(self, key: str, n: int = 1) -> None:
        self.details[key] = self.details.get(key, 0) + n
        self.checked += n

    def to_json(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "checked": self.checked,
                "failure_count": self.failure_count, "failures": self.failures,
                "details": self.details, "seconds": round(self.seconds, 3)}


def _timed(name: str):
    def deco(fn: Callable[..., SuiteResult]):
        def run(cfg: SuiteConfig = SuiteConfig(), **kw) -> SuiteResult:
            t = time.perf_counter()
            res = fn(cfg, SuiteResult(name), **kw)
            res.seconds = time.perf_counter() - t
            return res
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return deco


# ------------------------------------------------------------ shared pools


def frame_family(cfg: SuiteConfig, default_samples: int = 8) -> list[Frame]:
    return list(bank.ik_frame_family(cfg.max_worlds, cfg.agents, cfg.random_seed,
                                     cfg.samples(default_samples)))


def all_algebra_actions(alg: TableHAO, agents: Sequence[str], max_states: int) -> Iterable[AlgebraAction]:
    for k in range(1, max_states + 1):
        states = tuple(f"s{i}" for i in range(k))
        for rel in bank.all_action_shapes(states, agents):
            for pres in itertools.product(range(alg.n), repeat=k):
                yield AlgebraAction(states, states[0], rel, dict(zip(states, pres)))


def random_algebra_action(alg: TableHAO, agents: Sequence[str], max_states: int, rng: random.Random,
                          equivalence: bool = False) -> AlgebraAction:
    shape = bank.random_action("a", agents, [TOP], rng, max_states, equivalence)
    pre = {s: rng.randrange(alg.n) for s in shape.states}
    return AlgebraAction(shape.states, shape.designated, shape.rel, pre)


def actions_for(alg: TableHAO, frame: Frame, cfg: SuiteConfig, rng: random.Random, per_frame: int) -> list[AlgebraAction]:
    """Every action on one-point frames, seeded samples elsewhere; equivalence actions on MIPC frames."""
    if frame.n == 1:
        return list(all_algebra_actions(alg, cfg.agents, cfg.max_action_states))
    acts = [random_algebra_action(alg, cfg.agents, cfg.max_action_states, rng) for _ in range(per_frame)]
    if bank.is_mipc(frame):
        acts += [random_algebra_action(alg, cfg.agents, cfg.max_action_states, rng, True) for _ in range(per_frame)]
    return acts


def _desc(frame: Frame) -> str:
    return f"frame(worlds={frame.n}, order={sorted(p for p in frame.order if p[0] != p[1])}, " \
           f"rel={ {a: sorted(r) for a, r in frame.rel.items()} })"


def _adesc(act: AlgebraAction) -> str:
    return f"action(states={act.states}, rel={ {a: sorted(r) for a, r in act.rel.items()} }, pre={dict(act.pre)})"


# ---------------------------------------------------------------- frames


@_timed("frames")
def run_frames(cfg: SuiteConfig, res: SuiteResult, extra_frames: Sequence[tuple[str, Frame, str]] = ()) -> SuiteResult:
    """Frame conditions, complex algebras of frames, and closure of frames under update."""
    rng = random.Random(cfg.random_seed)
    for fr in frame_family(cfg):
        rep = check_ik_frame(fr)
        res.count("ik-frame")
        if not rep.ok or not is_ik_frame(fr):
            res.fail(f"{_desc(fr)}: {'; '.join(map(str, rep.violations))}")
            continue
        mipc = bank.is_mipc(fr)
        if mipc:
            res.count("mipc-frame")
            if not check_ik_frame(fr, "mipc").ok:
                res.fail(f"{_desc(fr)}: equivalence frame fails the MIPC check")
        alg = complex_algebra(fr, check=False)
        r = check_fsa(alg, "mha" if mipc else "fsa")
        res.count("complex-algebra")
        if not r.ok:
            res.fail(f"{_desc(fr)}: complex algebra violates {sorted(r.conditions())}")
        atoms = ["p", "q"]
        for _ in range(2):
            m = bank.model_of(fr, bank.random_valuation(fr, atoms, rng))
            act = bank.random_action("u", cfg.agents, bank.atomic_preconditions(atoms), rng,
                                     cfg.max_action_states, equivalence=mipc)
            env = ActionEnv(cfg.agents, {"u": act})
            upd, _ = product_update(m, act, env)
            rep = check_ik_frame(upd.frame, "mipc" if mipc else "ik")
            res.count("update-closure")
            if not rep.ok:
                res.fail(f"update of {_desc(fr)} breaks {sorted(rep.conditions())}")
    # symmetric relations: condition 1 forces condition 2
    for n in range(1, min(cfg.max_worlds, 3) + 1):
        for up in bank.posets(n):
            for labels in itertools.product(range(n), repeat=n):
                m = sum(1 << (i * n + j) for i in range(n) for j in range(n) if labels[i] == labels[j])
                fr = bank._frame(up, {"a": m})
                conds = check_ik_frame(fr).conditions()
                res.count("symmetry-argument")
                if "ik1" not in conds and "ik2" in conds:
                    res.fail(f"{_desc(fr)}: equivalence with condition 1 but not condition 2")
    for name, fr, mode in extra_frames:
        rep = check_ik_frame(fr, mode)
        res.count("fixture")
        if not rep.ok:
            res.fail(f"fixture {name}: " + "; ".join(map(str, rep.violations)))
    return res


# ------------------------------------------------------- algebra closure


def _boolean_dual_ok(t: TableHAO) -> bool:
    neg_t = t.imp_t[:, t.bot]
    return all((t.box_t[a] == neg_t[t.dia_t[a][neg_t]]).all() for a in t.agents)


@_timed("algebra-closure")
def run_algebra_closure(cfg: SuiteConfig, res: SuiteResult) -> SuiteResult:
    """FSA/MHA/tense closure of products and quotients, congruence and representative facts."""
    rng = random.Random(cfg.random_seed)
    for fr in frame_family(cfg):
        alg = tense_adjoints(complex_algebra(fr, check=False))
        mipc = bank.is_mipc(fr)
        for act in actions_for(alg, fr, cfg, rng, cfg.samples(6) if fr.n > 1 else 0):
            where = f"{_desc(fr)} {_adesc(act)}"
            prod = ProductAlgebra(alg, act)
            pt = prod.table()
            qt = QuotientAlgebra(prod).table()
            pre = prod.encode(prod.pre)
            equiv = mipc and all(act.is_equivalence(a) for a in cfg.agents)
            for label, t in (("product", pt), ("quotient", qt)):
                r = check_fsa(t, "mha" if equiv else "fsa")
                res.count(f"{label}-{'mha' if equiv else 'fsa'}")
                if not r.ok:
                    res.fail(f"{label} violates {sorted(r.conditions())}: {where}")
                bad = adjunction_failures(t)
                res.count(f"{label}-adjunctions")
                if bad:
                    res.fail(f"{label} lifted tense operators break {bad[0]}: {where}")
                if fr.is_discrete:
                    res.count(f"{label}-boolean-duality")
                    if not _boolean_dual_ok(t):
                        res.fail(f"{label} box is not the dual of diamond: {where}")
            if not check_heyting(qt).ok:
                res.fail(f"quotient is not a Heyting algebra: {where}")
            res.count("quotient-heyting")
            bad = congruence_failures(pt, pre)
            res.count("congruence")
            if bad:
                res.fail(f"congruence fails {bad[0]}: {where}")
            # [Pre -> b] = [b] for every product element b
            res.count("representative-facts")
            if not (pt.meet_t[pt.imp_t[pre, :], pre] == pt.meet_t[:, pre]).all():
                res.fail(f"[Pre -> b] differs from [b]: {where}")
    return res


# ---------------------------------------------------------------- duality


def _primes_fact_failures(alg: TableHAO) -> list[str]:
    """Join-generation by primes, kappa/lambda inverse isomorphisms, x not below kappa(x)."""
    out = []
    jp, mp = join_primes(alg), meet_primes(alg)
    for x in range(alg.n):
        acc = alg.bot
        for p in jp:
            if alg.leq_t[p, x]:
                acc = int(alg.join_t[acc, p])
        if acc != x:
            out.append(f"element {alg.labels[x]} is not the join of the primes below it")
    kap = {p: kappa(alg, p) for p in jp}
    if sorted(kap.values()) != sorted(mp):
        out.append("kappa does not map join-primes onto meet-primes")
    for p in jp:
        if lam(alg, kap[p]) != p:
            out.append(f"lambda(kappa({alg.labels[p]})) != {alg.labels[p]}")
        if alg.leq_t[p, kap[p]]:
            out.append(f"{alg.labels[p]} <= kappa of itself")
        for q in jp:
            if alg.leq_t[p, q] != alg.leq_t[kap[p], kap[q]]:
                out.append("kappa is not an order isomorphism")
        if not (alg.leq_t[p, :] == ~alg.leq_t[:, kap[p]]).all():
            out.append(f"j <= u iff u not<= kappa(j) fails at {alg.labels[p]}")
    return out


def _pre_sets(alg: TableHAO, frame_of_alg: Frame, act: AlgebraAction) -> dict:
    """Preconditions as downsets of the prime structure (primes below each precondition)."""
    lab = alg.labels
    return {s: [lab[p] for p in join_primes(alg) if alg.leq_t[p, act.pre[s]]] for s in act.states}


@_timed("duality")
def run_duality(cfg: SuiteConfig, res: SuiteResult) -> SuiteResult:
    """Round trips between frames and algebras, and the commutation of duals with products and updates."""
    rng = random.Random(cfg.random_seed)
    for fr in frame_family(cfg):
        alg = tense_adjoints(complex_algebra(fr, check=False))
        dual = prime_structure(alg, check=False)
        res.count("frame-roundtrip")
        if find_isomorphism(dual, fr) is None:
            res.fail(f"F is not isomorphic to its double dual: {_desc(fr)}")
            continue
        res.count("algebra-roundtrip")
        if find_isomorphism(complex_algebra(dual, check=False), alg) is None:
            res.fail(f"A is not isomorphic to (A_+)^+: {_desc(fr)}")
        res.count("prime-facts")
        for msg in _primes_fact_failures(alg)[:1]:
            res.fail(f"{msg}: {_desc(fr)}")
        mipc = bank.is_mipc(fr)
        for act in actions_for(alg, fr, cfg, rng, cfg.samples(6) if fr.n > 1 else 0):
            where = f"{_desc(fr)} {_adesc(act)}"
            prod = ProductAlgebra(alg, act)
            pt = prod.table()
            pdual = prime_structure(pt, check=False)
            res.count("product-dual")
            if find_isomorphism(pdual, product_frame(dual, act)) is None:
                res.fail(f"(prod A)_+ is not the coproduct of A_+: {where}")
            # primes of the product are supported on exactly one coordinate
            _, coords = prod._table
            for p in join_primes(pt):
                nz = [j for j in range(len(act.states)) if coords[p, j] != alg.bot]
                if len(nz) != 1 or coords[p, nz[0]] not in join_primes(alg):
                    res.fail(f"product prime {pt.labels[p]} is not one-coordinate supported: {where}")
                    break
            qt = QuotientAlgebra(prod).table()
            qdual = prime_structure(qt, check=False)
            res.count("update-dual")
            if find_isomorphism(qdual, update_frame(dual, act, _pre_sets(alg, dual, act))) is None:
                res.fail(f"(A^a)_+ is not (A_+)^a: {where}")
            res.count("update-complex-algebra")
            fa = update_frame(fr, act, {s: fr.subset(alg.masks[act.pre[s]]) for s in act.states})
            if find_isomorphism(qt, complex_algebra(fa, check=False)) is None:
                res.fail(f"A^a is not the complex algebra of the updated frame: {where}")
            rep = check_ik_frame(qdual, "mipc" if mipc and all(act.is_equivalence(a) for a in cfg.agents) else "ik")
            res.count("dual-is-frame")
            if not rep.ok:
                res.fail(f"dual of the quotient breaks {sorted(rep.conditions())}: {where}")
    return res


# -------------------------------------------------------------- soundness


def ieak_axioms(env: ActionEnv, ref: ActionRef, params: Sequence[Formula], pairs: Sequence[tuple],
                atoms: Sequence[str], agents: Sequence[str]) -> Iterable[tuple[str, Formula, Formula]]:
    """Instances (name, lhs, rhs) of the intuitionistic reduction axioms, built straight from the table."""
    act = env[ref.name]
    k = env.point(ref)
    pre = act.pre[k]
    yield "dia-bot", DynDia(ref, BOT), BOT
    yield "dia-top", DynDia(ref, TOP), pre
    yield "box-top", DynBox(ref, TOP), TOP
    yield "box-bot", DynBox(ref, BOT), neg(pre)
    for p in atoms:
        yield "dia-atom", DynDia(ref, Atom(p)), And(pre, Atom(p))
        yield "box-atom", DynBox(ref, Atom(p)), Imp(pre, Atom(p))
    for phi, psi in pairs:
        d1, d2 = DynDia(ref, phi), DynDia(ref, psi)
        yield "dia-or", DynDia(ref, Or(phi, psi)), Or(d1, d2)
        yield "box-or", DynBox(ref, Or(phi, psi)), Imp(pre, Or(d1, d2))
        yield "dia-and", DynDia(ref, And(phi, psi)), And(d1, d2)
        yield "box-and", DynBox(ref, And(phi, psi)), And(DynBox(ref, phi), DynBox(ref, psi))
        yield "dia-imp", DynDia(ref, Imp(phi, psi)), And(pre, Imp(d1, d2))
        yield "box-imp", DynBox(ref, Imp(phi, psi)), Imp(d1, d2)
    for phi in params:
        for i in agents:
            succ = [j for j in act.states if (k, j) in act.rel.get(i, ())]
            dias = big_or(Dia(i, DynDia(ActionRef(ref.name, j), phi)) for j in succ)
            boxes = big_and(Box(i, DynBox(ActionRef(ref.name, j), phi)) for j in succ)
            yield "dia-dia", DynDia(ref, Dia(i, phi)), And(pre, dias)
            yield "box-dia", DynBox(ref, Dia(i, phi)), Imp(pre, dias)
            yield "dia-box", DynDia(ref, Box(i, phi)), And(pre, boxes)
            yield "box-box", DynBox(ref, Box(i, phi)), Imp(pre, boxes)


def classical_axioms(env: ActionEnv, ref: ActionRef, params: Sequence[Formula], pairs: Sequence[tuple],
                     atoms: Sequence[str], agents: Sequence[str]) -> Iterable[tuple[str, Formula, Formula]]:
    act = env[ref.name]
    k = env.point(ref)
    pre = act.pre[k]
    for p in atoms:
        yield "eak-atom", DynDia(ref, Atom(p)), And(pre, Atom(p))
    for phi in params:
        yield "eak-neg", DynDia(ref, neg(phi)), And(pre, neg(DynDia(ref, phi)))
        for i in agents:
            succ = [j for j in act.states if (k, j) in act.rel.get(i, ())]
            dias = big_or(Dia(i, DynDia(ActionRef(ref.name, j), phi)) for j in succ)
            yield "eak-dia", DynDia(ref, Dia(i, phi)), And(pre, dias)
    for phi, psi in pairs:
        yield "eak-or", DynDia(ref, Or(phi, psi)), Or(DynDia(ref, phi), DynDia(ref, psi))


IEAK_AXIOMS = ("dia-bot", "dia-top", "box-top", "box-bot", "dia-atom", "box-atom", "dia-or", "box-or",
               "dia-and", "box-and", "dia-imp", "box-imp", "dia-dia", "box-dia", "dia-box", "box-box")
EAK_AXIOMS = ("eak-atom", "eak-neg", "eak-or", "eak-dia")


def parameter_formulas(atoms: Sequence[str], agents: Sequence[str]) -> tuple[list[Formula], list[tuple]]:
    """Static parameters of depth at most 2, and the pairs used by binary schemas."""
    p, q = Atom(atoms[0]), Atom(atoms[-1])
    params = [p, q, BOT, TOP, neg(p), And(p, q), Or(p, q), Imp(p, q)]
    for i in agents:
        params += [Box(i, p), Dia(i, q)]
    core = [p, q, neg(p), Box(agents[0], q), Dia(agents[-1], p)]
    return params, [(x, y) for x in core for y in core]


def soundness_actions(agents: Sequence[str], atoms: Sequence[str], max_states: int, rng: random.Random,
                      samples: int) -> list[ActionStructure]:
    """All one-state actions with atomic preconditions plus seeded multi-state ones."""
    pres = bank.atomic_preconditions(atoms)
    out = []
    for rel in bank.all_action_shapes(("s0",), agents):
        for p in pres:
            out.append(ActionStructure("u", ("s0",), "s0", rel, {"s0": p}))
    for _ in range(samples):
        act = bank.random_action("u", agents, pres, rng, max_states)
        if len(act.states) > 1 or max_states == 1:
            out.append(act)
    return out


@_timed("soundness")
def run_soundness(cfg: SuiteConfig, res: SuiteResult, actions_per_model: int = 3) -> SuiteResult:
    """Reduction axioms on the classical and intuitionistic model banks, relationally and algebraically."""
    rng = random.Random(cfg.random_seed)
    atoms = ["p", "q"]
    agents = cfg.agents
    worlds = min(cfg.max_worlds, 3)
    params, pairs = parameter_formulas(atoms, agents)
    pool = soundness_actions(agents, atoms, cfg.max_action_states, rng, 24)
    samples = cfg.samples(150)
    classical, _ = bank.classical_bank(atoms, agents, worlds, rng.randrange(1 << 30), 2, samples)
    ik, _ = bank.ik_bank(atoms, agents, worlds, rng.randrange(1 << 30), 1, samples)
    res.details["classical-models"] = len(classical)
    res.details["ik-models"] = len(ik)
    # every model up to these sizes; seeded samples above them
    res.details["classical-exhaustive-upto"] = min(worlds, 2)
    res.details["ik-exhaustive-upto"] = 1
    res.details["actions-per-model"] = actions_per_model
    res.details["action-pool"] = len(pool)
    seen: set[str] = set()
    # instances are built once per action so that models share formula objects in their memo tables
    prepared = []
    for act in pool:
        env = ActionEnv(agents, {"u": act})
        refs = [ActionRef("u", None if s == act.designated else s) for s in act.states]
        ieak = [x for r in refs for x in ieak_axioms(env, r, params, pairs, atoms, agents)]
        eak = [x for r in refs for x in classical_axioms(env, r, params, pairs, atoms, agents)]
        prepared.append((env, ieak, eak))

    def check(model: Model, classical_too: bool):
        for env, ieak, eak in rng.sample(prepared, min(actions_per_model, len(prepared))):
            for name, lhs, rhs in (ieak + eak if classical_too else ieak):
                seen.add(name)
                res.checked += 1
                if extension_mask(model, env, lhs) != extension_mask(model, env, rhs):
                    res.fail(f"{name}: {lhs} vs {rhs} on {_desc(model.frame)} val={dict(model.val)}")

    for m in classical:
        check(m, True)
    for m in ik:
        check(m, False)
    # algebraic side: the same instances through the algebraic extension map on complex algebras
    for m in ik[: samples]:
        alg = complex_algebra(m.frame, check=False)
        am = AlgebraicModel(alg, {p: alg.element(ws) for p, ws in m.val.items()})
        act = rng.choice(pool)
        env = ActionEnv(agents, {"u": act})
        for name, lhs, rhs in ieak_axioms(env, ActionRef("u"), params, pairs, atoms, agents):
            res.checked += 1
            if eval_algebraic(am, env, lhs) != eval_algebraic(am, env, rhs):
                res.fail(f"algebraic {name}: {lhs} vs {rhs} on {_desc(m.frame)}")
    res.details["schemas"] = sorted(seen)
    missing = set(IEAK_AXIOMS + EAK_AXIOMS) - seen
    if missing:
        res.fail(f"schemas never instantiated: {sorted(missing)}")
    return res


# ---------------------------------------------------------------- rewriter


def random_dynamic_formula(rng: random.Random, env: ActionEnv, depth: int, atoms, agents,
                           max_nesting: int = 2) -> Formula:
    refs = bank.env_refs(env)
    while True:
        phi = bank.random_formula(rng, depth, atoms, agents, refs)
        if not is_static(phi) and dynamic_depth(phi) <= max_nesting:
            return phi


@_timed("rewriter")
def run_rewriter(cfg: SuiteConfig, res: SuiteResult, max_steps: int = 10**4) -> SuiteResult:
    """Normalize random dynamic formulas and compare each with its normal form on the model bank."""
    rng = random.Random(cfg.random_seed)
    atoms = ["p", "q"]
    agents = cfg.agents
    steps = []
    for i in range(cfg.samples(200)):
        env = bank.random_env(rng, agents, atoms, cfg.max_action_states)
        phi = random_dynamic_formula(rng, env, cfg.max_formula_depth, atoms, agents)
        try:
            nf, trace = normalize(phi, env, max_steps)
        except RewriteError as e:
            res.fail(f"{phi}: {e}")
            continue
        steps.append(len(trace.steps))
        res.count("normalized")
        if not is_static(nf) or trace.replay() != nf:
            res.fail(f"{phi}: output not static or trace does not replay")
            continue
        verdict = equivalence_check(phi, nf, env, max_worlds=min(cfg.max_worlds, 3), seed=cfg.random_seed + i)
        res.count("models", verdict.models_checked)
        if not verdict:
            res.fail(f"{phi} differs from its normal form at world {verdict.world}")
    if steps:
        res.details["max-steps"] = max(steps)
        res.details["mean-steps"] = round(sum(steps) / len(steps), 1)
    return res


# --------------------------------------------------------------- agreement


@_timed("agreement")
def run_agreement(cfg: SuiteConfig, res: SuiteResult) -> SuiteResult:
    """Relational and algebraic extension maps agree on random (frame, valuation, formula) triples."""
    rng = random.Random(cfg.random_seed)
    atoms = ["p", "q"]
    agents = cfg.agents
    dynamic = 0
    for _ in range(cfg.samples(1000)):
        env = bank.random_env(rng, agents, atoms, cfg.max_action_states)
        fr = bank.random_ik_frame(cfg.max_worlds, agents, rng)
        m = bank.model_of(fr, bank.random_valuation(fr, atoms, rng))
        phi = bank.random_formula(rng, cfg.max_formula_depth, atoms, agents, bank.env_refs(env))
        dynamic += not is_static(phi)
        alg = complex_algebra(fr, check=False)
        am = AlgebraicModel(alg, {p: alg.element(ws) for p, ws in m.val.items()})
        res.count("triples")
        rel = extension_mask(m, env, phi)
        if alg.masks[eval_algebraic(am, env, phi)] != rel:
            res.fail(f"{phi} on {_desc(fr)} val={dict(m.val)}")
        if not fr.is_downset(rel):
            res.fail(f"extension of {phi} is not a downset on {_desc(fr)}")
    res.details["dynamic-formulas"] = dynamic
    return res


# ---------------------------------------------------------------- appendix


HA_IDENTITIES = (
    "x & (x -> y) <= y",
    "x -> (y & z) = (x -> y) & (x -> z)",
    "x & y <= x -> y",
    "x -> y = x -> (x & y)",
    "(x & y) -> z = x -> (y -> z)",
    "x & (y -> z) = x & ((x & y) -> z)",
)


def ha_identity_failures(t: TableHAO) -> list[str]:
    n = t.n
    x = np.arange(n)[:, None, None]
    y = np.arange(n)[None, :, None]
    z = np.arange(n)[None, None, :]
    L, M, I = t.leq_t, t.meet_t, t.imp_t
    checks = (
        L[M[x, I[x, y]], y],
        I[x, M[y, z]] == M[I[x, y], I[x, z]],
        L[M[x, y], I[x, y]],
        I[x, y] == I[x, M[x, y]],
        I[M[x, y], z] == I[x, I[y, z]],
        M[x, I[y, z]] == M[x, I[M[x, y], z]],
    )
    return [name for name, ok in zip(HA_IDENTITIES, checks) if not np.all(ok)]


def fs1_verdicts(t: TableHAO, agent: str) -> tuple[bool, bool, bool]:
    n = t.n
    x = np.arange(n)[:, None]
    y = np.arange(n)[None, :]
    L, M, I = t.leq_t, t.meet_t, t.imp_t
    d, b = t.dia_t[agent], t.box_t[agent]
    return (
        bool(L[d[I[x, y]], I[b[x], d[y]]].all()),
        bool(L[M[b[x], d[y]], d[M[x, y]]].all()),
        bool(L[b[I[x, y]], I[d[x], d[y]]].all()),
    )


class ClassQuotient:
    """Quotient of a product table built from explicit classes, independent of the representative tables."""

    def __init__(self, pt: TableHAO, pre: int):
        key = [int(pt.meet_t[f, pre]) for f in range(pt.n)]
        groups: dict[int, list[int]] = {}
        for f, k in enumerate(key):
            groups.setdefault(k, []).append(f)
        self.classes = list(groups.values())
        self.cls = {f: c for c, members in enumerate(self.classes) for f in members}
        self.pt, self.pre = pt, pre

    def member(self, c: int) -> int:
        return self.classes[c][0]

    def i_prime(self, c: int) -> int:
        below = [f for f in self.classes[c] if self.pt.leq_t[f, self.pre]]
        if len(below) != 1:
            raise AssertionError("class without a unique representative below Pre")
        return below[0]

    def op(self, fn, *cs) -> int:
        return self.cls[fn(*(self.member(c) for c in cs))]


def i_prime_failures(pt: TableHAO, pre: int, agents: Sequence[str]) -> list[str]:
    """The five i' clauses (the box clause up to its canonical representative), plus pi after i' = id."""
    q = ClassQuotient(pt, pre)
    M, J, I = pt.meet_t, pt.join_t, pt.imp_t
    out = []
    n = len(q.classes)
    ip = [q.i_prime(c) for c in range(n)]
    for c in range(n):
        if q.cls[int(M[ip[c], pre])] != c:
            out.append("pi(i'(c)) != c")
    for b, c in itertools.product(range(n), repeat=2):
        if ip[q.op(lambda f, g: int(J[f, g]), b, c)] != J[ip[b], ip[c]]:
            out.append("join clause")
        if ip[q.op(lambda f, g: int(M[f, g]), b, c)] != M[ip[b], ip[c]]:
            out.append("meet clause")
        if ip[q.op(lambda f, g: int(I[f, g]), b, c)] != M[pre, I[ip[b], ip[c]]]:
            out.append("implication clause")
    for a in agents:
        d, bx = pt.dia_t[a], pt.box_t[a]
        for b in range(n):
            dia_b = q.op(lambda f: int(M[d[M[f, pre]], pre]), b)
            if ip[dia_b] != M[d[M[ip[b], pre]], pre]:
                out.append("diamond clause")
            box_b = q.op(lambda f: int(I[pre, bx[I[pre, f]]]), b)
            rhs = int(I[pre, bx[I[pre, ip[b]]]])
            if q.cls[rhs] != box_b or ip[box_b] != M[pre, rhs]:
                out.append("box clause")
    return sorted(set(out))


def literal_box_clause_holds(pt: TableHAO, pre: int, agent: str) -> bool:
    """The box clause read without normalizing the right-hand side below Pre."""
    q = ClassQuotient(pt, pre)
    I, bx = pt.imp_t, pt.box_t[agent]
    for b in range(len(q.classes)):
        box_b = q.op(lambda f: int(I[pre, bx[I[pre, f]]]), b)
        if q.i_prime(box_b) != I[pre, bx[I[pre, q.i_prime(b)]]]:
            return False
    return True


@_timed("appendix")
def run_appendix(cfg: SuiteConfig, res: SuiteResult) -> SuiteResult:
    """HA identities, the FS1 equivalents, and the i' clauses on complex algebras and their updates."""
    rng = random.Random(cfg.random_seed)
    for fr in frame_family(cfg):
        alg = complex_algebra(fr, check=False)
        res.count("ha-identities")
        for name in ha_identity_failures(alg):
            res.fail(f"{name} fails on the complex algebra of {_desc(fr)}")
        for a in alg.agents:
            res.count("fs1-triple")
            v = fs1_verdicts(alg, a)
            if len(set(v)) != 1 or not v[0]:
                res.fail(f"FS1 equivalents disagree {v} for agent {a} on {_desc(fr)}")
        for act in actions_for(alg, fr, cfg, rng, cfg.samples(3) if fr.n > 1 else 0):
            prod = ProductAlgebra(alg, act)
            pt = prod.table()
            pre = prod.encode(prod.pre)
            res.count("i-prime-clauses")
            for msg in i_prime_failures(pt, pre, alg.agents):
                res.fail(f"{msg}: {_desc(fr)} {_adesc(act)}")
            qt = QuotientAlgebra(prod).table()
            if qt.n <= 64:
                res.count("ha-identities-quotient")
                for name in ha_identity_failures(qt):
                    res.fail(f"{name} fails on a quotient: {_desc(fr)} {_adesc(act)}")
    return res


SUITES = {
    "frames": run_frames,
    "algebra-closure": run_algebra_closure,
    "duality": run_duality,
    "soundness": run_soundness,
    "rewriter": run_rewriter,
    "agreement": run_agreement,
    "appendix": run_appendix,
}
