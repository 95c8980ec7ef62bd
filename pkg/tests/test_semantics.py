import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import envs, formulas, ik_models
from ieak import bank
from ieak.algebra import TableHAO
from ieak.duality import complex_algebra
from ieak.io import data_path, load_actions, load_algebra, load_model
from ieak.relational import extension_mask
from ieak.semantics import (
    AlgebraicModel, EvaluationError, ResourceBoundError, countervaluation, eval_algebraic,
    update_algebraic_model, validity,
)
from ieak.suites import ieak_axioms, parameter_formulas
from ieak.syntax import TOP, ActionEnv, ActionRef, ActionStructure, Atom, DynDia, parse_formula


def algebraic_twin(m):
    alg = complex_algebra(m.frame, check=False)
    return alg, AlgebraicModel(alg, {p: alg.element(ws) for p, ws in m.val.items()})


@given(st.data())
def test_agreement_with_relational_semantics(data):
    env = data.draw(envs())
    m = data.draw(ik_models())
    phi = data.draw(formulas(refs=bank.env_refs(env), max_leaves=10))
    alg, am = algebraic_twin(m)
    assert alg.masks[eval_algebraic(am, env, phi)] == extension_mask(m, env, phi)


@given(ik_models(), st.data())
def test_axiom_instances_hold_algebraically(m, data):
    rng = data.draw(st.randoms(use_true_random=False))
    act = bank.random_action("u", ("a", "b"), bank.atomic_preconditions(["p", "q"]), rng)
    env = ActionEnv(("a", "b"), {"u": act})
    params, pairs = parameter_formulas(["p", "q"], ["a", "b"])
    _, am = algebraic_twin(m)
    for s in act.states:
        ref = ActionRef("u", None if s == act.designated else s)
        for name, lhs, rhs in ieak_axioms(env, ref, params[:6], pairs[:6], ["p", "q"], ["a", "b"]):
            assert eval_algebraic(am, env, lhs) == eval_algebraic(am, env, rhs), name


def test_cards_algebraic_extension():
    m = load_model(data_path("cards_model.json"))
    env = load_actions(data_path("cards_actions.json"))
    alg, am = algebraic_twin(m)
    phi = parse_formula("<alpha><beta> box c Ga", env)
    assert alg.worlds_of(eval_algebraic(am, env, phi)) == {"state2"}
    upd = update_algebraic_model(am, env["alpha"], env)
    # shifts reuse the same update
    assert update_algebraic_model(am, env["alpha"], env) is upd
    assert alg.worlds_of(upd.base.valuation["Ga"]) == {"state2"}
    assert len(upd.quotient.elements) == 8
    top = upd.quotient.top
    assert upd.pi(upd.product.top) == top == upd.product.pre and upd.i_prime(top) == top


def test_missing_atom_is_an_error():
    alg = load_algebra(data_path("chain3_algebra.json"))
    with pytest.raises(EvaluationError):
        eval_algebraic(AlgebraicModel(alg, {}), ActionEnv(("a",), {}), Atom("p"))


def test_validity_on_three_chain():
    alg = load_algebra(data_path("chain3_algebra.json"))
    env = ActionEnv(("a",), {})
    assert not validity(alg, env, parse_formula("p | ~p"))
    assert countervaluation(alg, env, parse_formula("p | ~p")) == {"p": 1}
    assert validity(alg, env, parse_formula("~~(p | ~p)"))
    assert validity(alg, env, parse_formula("box a p -> p"))


def test_validity_cap():
    alg = load_algebra(data_path("chain3_algebra.json"))
    env = ActionEnv(("a",), {})
    with pytest.raises(ResourceBoundError):
        validity(alg, env, parse_formula("p & q & r & s"), cap=10)


def test_dynamic_validity_uses_precondition_atoms():
    alg = load_algebra(data_path("chain3_algebra.json"))
    act = ActionStructure("u", ("s",), "s", {"a": {("s", "s")}}, {"s": Atom("q")})
    env = ActionEnv(("a",), {"u": act})
    # <u>p <-> (q & p) over every valuation of p and q
    assert validity(alg, env, parse_formula("<u> p <-> q & p", env))
    assert not validity(alg, env, parse_formula("<u> p <-> p", env))


def test_preservation_of_facts_on_abstract_algebra():
    # a three-chain that is not presented as a complex algebra of a given model
    leq = np.array([[1, 1, 1], [0, 1, 1], [0, 0, 1]], dtype=bool)
    alg = TableHAO.from_order(["0", "m", "1"], leq, {"a": np.array([0, 2, 2])}, {"a": np.array([0, 0, 2])})
    act = ActionStructure("u", ("s", "t"), "s", {"a": {("s", "t"), ("t", "t")}}, {"s": Atom("q"), "t": TOP})
    env = ActionEnv(("a",), {"u": act})
    for p_val in range(3):
        for q_val in range(3):
            am = AlgebraicModel(alg, {"p": p_val, "q": q_val})
            lhs = eval_algebraic(am, env, DynDia(ActionRef("u"), Atom("p")))
            assert lhs == alg.meet(q_val, p_val)
            lhs_t = eval_algebraic(am, env, DynDia(ActionRef("u", "t"), Atom("p")))
            assert lhs_t == p_val
