import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import actions, envs, formulas, ik_models
from ieak import bank
from ieak.io import data_path, load_actions, load_model
from ieak.relational import (
    EvaluationError, Frame, Model, check_ik_frame, coproduct_model, eval_classical, eval_ik, evaluate,
    extension_mask, is_ik_frame, product_update, update_frame,
)
from ieak.syntax import TOP, ActionEnv, ActionRef, ActionStructure, Atom, DynDia, parse_formula


@pytest.fixture(scope="module")
def cards():
    return load_model(data_path("cards_model.json")), load_actions(data_path("cards_actions.json"))


def chain(rel_a):
    return Frame.make(("x", "y"), {"a": rel_a}, [("x", "y")])


def test_two_chain_with_top_loop():
    # R = {(y,y)} on x <= y: condition 1 fails at (y,x), condition 2 at (x,y); condition 3 holds
    rep = check_ik_frame(chain({("y", "y")}))
    assert rep.conditions() == {"ik1", "ik2"}
    by = {v.condition: v.witnesses for v in rep.violations}
    assert by["ik1"] == (("y", "x"),) and by["ik2"] == (("x", "y"),)


def test_order_defects_reported():
    fr = Frame(("x", "y"), frozenset({("x", "y"), ("y", "x"), ("x", "x")}), {})
    # y <= x <= y without y <= y also breaks transitivity
    assert check_ik_frame(fr).conditions() == {"order-reflexive", "order-transitive", "order-antisymmetric"}


def test_mipc_mode_requires_equivalences():
    fr = Frame.make(("x", "y"), {"a": {("x", "x"), ("y", "y"), ("x", "y")}})
    assert "equivalence" in check_ik_frame(fr, "mipc").conditions()
    eq = Frame.make(("x", "y"), {"a": set(itertools.product("xy", repeat=2))})
    assert check_ik_frame(eq, "mipc").ok


@given(st.integers(1, 3), st.data())
def test_fast_frame_check_matches_report(n, data):
    up = data.draw(st.sampled_from(bank.posets(n)))
    m = data.draw(st.integers(0, (1 << (n * n)) - 1))
    fr = bank._frame(up, {"a": m})
    assert is_ik_frame(fr) == check_ik_frame(fr).ok


def test_ik_relation_counts():
    # number of (poset, IK relation) pairs up to poset isomorphism
    assert [sum(len(bank.ik_relations(up)) for up in bank.posets(n)) for n in (1, 2, 3)] == [2, 24, 941]
    assert [len(bank.posets(n)) for n in (1, 2, 3, 4)] == [1, 2, 5, 16]


def test_example_product_update(cards):
    m, env = cards
    alpha, beta = env["alpha"], env["beta"]
    assert len(coproduct_model(m, alpha).worlds) == 6
    ma, trace = product_update(m, alpha, env)
    assert set(ma.worlds) == {("state2", "k"), ("state1", "l"), ("state3", "l")}
    nonloops = {a: {frozenset(p) for p in ps if p[0] != p[1]} for a, ps in ma.frame.rel.items()}
    assert nonloops["a"] == {frozenset({("state1", "l"), ("state3", "l")})}
    assert nonloops["b"] == set()
    assert nonloops["c"] == {frozenset({("state1", "l"), ("state2", "k")})}
    assert trace.iota("k")["state1"] == ("state1", "k")
    mab, _ = product_update(ma, beta, env)
    assert mab.worlds == ((("state2", "k"), "s"),)
    assert mab.atoms_true_at(mab.worlds[0]) == ["Ga", "Wb", "Wc"]


def test_example_extensions(cards):
    m, env = cards
    ev = lambda s: eval_classical(m, env, parse_formula(s, env))
    assert ev("Ga") == {"state2"}
    assert ev("<alpha> box b Ga") == {"state2"}
    assert ev("<alpha><beta> box c Ga") == {"state2"}
    assert ev("[alpha][beta] box c Ga") == set(m.worlds)
    assert ev("<alpha@l> box a Wa") == {"state1", "state3"}


def test_updates_shared_between_shifts(cards):
    m, env = cards
    extension_mask(m, env, parse_formula("<alpha> Ga & <alpha@l> Wa", env))
    caches = m.__dict__["_caches"]
    (cache,) = [c for c in caches.values() if c.env is env]
    assert list(cache.updates) == ["alpha"]


def test_eval_checks_model_kind(cards):
    m, env = cards
    with pytest.raises(EvaluationError):
        eval_ik(Model(m.frame, {"p": {"state1"}}, "ik"), env, Atom("q"))
    fr = Frame.make(("x", "y"), {"a": set()}, [("x", "y")])
    with pytest.raises(EvaluationError):
        eval_classical(Model(fr, {}, "classical"), ActionEnv(), TOP)
    with pytest.raises(EvaluationError):
        # valuation that is not a downset
        eval_ik(Model(fr, {"p": {"y"}}, "ik"), ActionEnv(), Atom("p"))


@given(ik_models(), formulas())
def test_static_agreement_with_oracle(m, phi):
    env = ActionEnv(("a", "b"), {})
    assert evaluate(m, env, phi) == oracles.extension(m, env, phi)


@given(st.data())
def test_dynamic_agreement_with_oracle(data):
    env = data.draw(envs())
    m = data.draw(ik_models())
    phi = data.draw(formulas(refs=bank.env_refs(env), max_leaves=8))
    assert evaluate(m, env, phi) == oracles.extension(m, env, phi)


@given(ik_models(), formulas())
def test_extensions_are_downsets(m, phi):
    env = ActionEnv(("a", "b"), {})
    assert m.frame.is_downset(extension_mask(m, env, phi))


@given(ik_models(), st.data())
def test_update_preserves_ik_frames(m, data):
    mipc = bank.is_mipc(m.frame)
    act = data.draw(actions())
    if mipc:
        act = bank.random_action("u", ("a", "b"), [Atom("p"), TOP], data.draw(st.randoms()), 2, True)
    env = ActionEnv(("a", "b"), {"u": act})
    upd, _ = product_update(m, act, env)
    assert check_ik_frame(upd.frame, "mipc" if mipc else "ik").ok
    assert not upd.check_valuation()


@given(ik_models(), st.data())
def test_designation_independence(m, data):
    act = data.draw(actions())
    env = ActionEnv(("a", "b"), {"u": act})
    upd1, _ = product_update(m, act, env)
    for s in act.states:
        shifted = ActionStructure("u", act.states, s, act.rel, act.pre)
        env2 = ActionEnv(("a", "b"), {"u": shifted})
        upd2, _ = product_update(m, shifted, env2)
        assert upd1.worlds == upd2.worlds and upd1.frame.rel == upd2.frame.rel


def test_update_frame_matches_product_update(cards):
    m, env = cards
    ma, _ = product_update(m, env["alpha"], env)
    pre = {k: eval_classical(m, env, env["alpha"].pre[k]) for k in env["alpha"].states}
    fr = update_frame(m.frame, env["alpha"], pre)
    assert fr.worlds == ma.frame.worlds and fr.rel == ma.frame.rel and fr.order == ma.frame.order


@given(ik_models(), st.sampled_from(["p", "q"]))
def test_trivial_action_is_identity(m, p):
    act = ActionStructure("u", ("s",), "s", {"a": {("s", "s")}, "b": {("s", "s")}}, {"s": TOP})
    env = ActionEnv(("a", "b"), {"u": act})
    assert evaluate(m, env, DynDia(ActionRef("u"), Atom(p))) == m.val[p]
