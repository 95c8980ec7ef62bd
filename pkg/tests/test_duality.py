import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ik_frames
from ieak.algebra import AlgebraError, ProductAlgebra, QuotientAlgebra, TableHAO, tense_adjoints
from ieak.duality import (
    SignatureError, brute_force_frame_iso, complex_algebra, find_isomorphism, join_primes, kappa, lam,
    meet_primes, prime_structure,
)
from ieak.io import data_path, load_actions, load_model
from ieak.relational import Frame, product_frame, product_update
from ieak.semantics import AlgebraicModel, induced_action
from ieak.suites import _primes_fact_failures, random_algebra_action


def chain(n):
    leq = np.array([[i <= j for j in range(n)] for i in range(n)])
    ident = np.arange(n)
    return TableHAO.from_order([str(i) for i in range(n)], leq, {"a": ident}, {"a": ident})


def test_primes_of_a_chain():
    c = chain(4)
    assert join_primes(c) == [1, 2, 3]
    assert meet_primes(c) == [0, 1, 2]
    assert [kappa(c, p) for p in (1, 2, 3)] == [0, 1, 2]
    assert [lam(c, m) for m in (0, 1, 2)] == [1, 2, 3]


def test_kappa_is_negation_on_boolean_atoms():
    fr = Frame.classical((0, 1, 2), {"a": set()})
    alg = complex_algebra(fr)
    for p in join_primes(alg):
        assert kappa(alg, p) == alg.neg(p)
    assert len(join_primes(alg)) == 3
    assert not _primes_fact_failures(alg)


def test_two_chain_vs_antichain():
    chain2 = Frame.make(("x", "y"), {"a": set()}, [("x", "y")])
    anti = Frame.make(("x", "y"), {"a": set()})
    assert find_isomorphism(chain2, anti) is None
    with pytest.raises(SignatureError):
        find_isomorphism(chain2, Frame.make(("x", "y"), {"b": set()}))
    with pytest.raises(SignatureError):
        find_isomorphism(chain2, chain(2))


def test_complex_algebra_rejects_non_ik_frames():
    with pytest.raises(AlgebraError):
        complex_algebra(Frame.make(("x", "y"), {"a": {("y", "y")}}, [("x", "y")]))


@given(ik_frames(max_worlds=3))
def test_complex_algebra_operations_match_frame(fr):
    alg = complex_algebra(fr)
    for i, m in enumerate(alg.masks):
        for a in fr.agents:
            assert alg.masks[alg.dia(a, i)] == fr.dia(a, m)
            assert alg.masks[alg.box(a, i)] == fr.box(a, m)
        for j, k in enumerate(alg.masks):
            assert alg.masks[alg.imp(i, j)] == fr.imp(m, k)
    assert len(join_primes(alg)) == fr.n


@given(ik_frames(max_worlds=3))
def test_frame_double_dual(fr):
    alg = complex_algebra(fr)
    dual = prime_structure(alg)
    w = find_isomorphism(dual, fr)
    assert w is not None
    assert brute_force_frame_iso(dual, fr) is not None
    assert find_isomorphism(complex_algebra(dual), alg) is not None
    assert not _primes_fact_failures(alg)


@given(ik_frames(max_worlds=3), ik_frames(max_worlds=3))
def test_matcher_agrees_with_permutation_search(f1, f2):
    assert (find_isomorphism(f1, f2) is None) == (brute_force_frame_iso(f1, f2) is None)


@given(ik_frames(max_worlds=3), st.permutations(range(3)))
def test_relabelled_frames_are_isomorphic(fr, perm):
    names = {w: f"v{perm[i % 3]}_{i}" for i, w in enumerate(fr.worlds)}
    g = Frame(tuple(names[w] for w in reversed(fr.worlds)),
              frozenset((names[v], names[w]) for v, w in fr.order),
              {a: frozenset((names[v], names[w]) for v, w in ps) for a, ps in fr.rel.items()})
    w = find_isomorphism(fr, g)
    assert w is not None and all(w.backward[w.forward[x]] == x for x in fr.worlds)


@given(ik_frames(max_worlds=3), st.randoms(use_true_random=False))
def test_primes_of_products_are_single_coordinate(fr, rng):
    alg = tense_adjoints(complex_algebra(fr, check=False))
    act = random_algebra_action(alg, ("a", "b"), 2, rng)
    P = ProductAlgebra(alg, act)
    t, coords = P._table
    base_primes = set(join_primes(alg))
    primes = join_primes(t)
    assert len(primes) == len(act.states) * len(base_primes)
    for p in primes:
        support = [j for j in range(len(act.states)) if coords[p, j] != alg.bot]
        assert len(support) == 1 and coords[p, support[0]] in base_primes
    assert find_isomorphism(prime_structure(t), product_frame(prime_structure(alg), act)) is not None


@pytest.fixture(scope="module")
def cards():
    return load_model(data_path("cards_model.json")), load_actions(data_path("cards_actions.json"))


def test_cards_update_dual(cards):
    m, env = cards
    alg = complex_algebra(m.frame)
    am = AlgebraicModel(alg, {p: alg.element(ws) for p, ws in m.val.items()})
    act = induced_action(env["alpha"], am, env)
    assert alg.worlds_of(act.pre["k"]) == {"state2"}
    assert alg.worlds_of(act.pre["l"]) == {"state1", "state3"}
    q = QuotientAlgebra(ProductAlgebra(alg, act)).table()
    assert q.n == 8 and len(join_primes(q)) == 3
    ma, _ = product_update(m, env["alpha"], env)
    assert find_isomorphism(q, complex_algebra(ma.frame)) is not None
    assert find_isomorphism(prime_structure(q), ma.frame) is not None


def test_valuations_respected_by_isomorphism(cards):
    m, _ = cards
    fr = m.frame
    assert find_isomorphism(fr, fr, m.val, m.val) is not None
    swapped = dict(m.val)
    swapped["Ga"], swapped["Gb"] = m.val["Gb"], m.val["Ga"]
    assert find_isomorphism(fr, fr, m.val, swapped) is None
