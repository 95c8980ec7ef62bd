import os
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from ieak import bank  # noqa: E402
from ieak.syntax import (  # noqa: E402
    BOT, TOP, ActionRef, ActionStructure, ActionEnv, And, Atom, Box, Dia, DynBox, DynDia, Imp, Or,
)

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ATOMS = ("p", "q")
AGENTS = ("a", "b")


def formulas(atoms=ATOMS, agents=AGENTS, refs=(), max_leaves=12):
    leaves = st.sampled_from([Atom(p) for p in atoms] + [BOT, TOP])

    def extend(children):
        opts = [
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Imp, children, children),
            st.builds(Box, st.sampled_from(agents), children),
            st.builds(Dia, st.sampled_from(agents), children),
        ]
        if refs:
            opts += [st.builds(DynDia, st.sampled_from(refs), children),
                     st.builds(DynBox, st.sampled_from(refs), children)]
        return st.one_of(opts)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@st.composite
def ik_frames(draw, max_worlds=3, agents=AGENTS):
    n = draw(st.integers(1, max_worlds))
    up = draw(st.sampled_from(bank.posets(n)))
    rels = {a: draw(st.sampled_from(bank.ik_relations(up))) for a in agents}
    return bank._frame(up, rels)


@st.composite
def ik_models(draw, max_worlds=3, agents=AGENTS, atoms=ATOMS):
    fr = draw(ik_frames(max_worlds, agents))
    ds = bank.downset_masks(fr)
    val = {p: fr.subset(draw(st.sampled_from(ds))) for p in atoms}
    return bank.model_of(fr, val)


@st.composite
def actions(draw, name="u", agents=AGENTS, pres=None, max_states=2):
    k = draw(st.integers(1, max_states))
    states = tuple(f"s{i}" for i in range(k))
    pairs = [(i, j) for i in states for j in states]
    rel = {a: frozenset(draw(st.sets(st.sampled_from(pairs)))) for a in agents}
    pres = pres or [Atom(p) for p in ATOMS] + [TOP, BOT, Box("a", Atom("p")), Imp(Atom("q"), Atom("p"))]
    pre = {s: draw(st.sampled_from(pres)) for s in states}
    return ActionStructure(name, states, states[0], rel, pre)


@st.composite
def envs(draw, agents=AGENTS):
    u = draw(actions("u", agents))
    v_pres = [DynDia(ActionRef("u", s), Atom("p")) for s in u.states] + [Atom("q")]
    v = draw(actions("v", agents, v_pres))
    return ActionEnv(agents, {"u": u, "v": v})


def env_refs(env):
    return bank.env_refs(env)


# --------------------------------------------------------- acceptance lines

ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
