import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ik_frames
from ieak.algebra import AlgebraAction, ProductAlgebra, QuotientAlgebra, TableHAO, tense_adjoints
from ieak.duality import complex_algebra
from ieak.io import data_path, load_model
from ieak.relational import Frame
from ieak.suites import (
    SUITES, ClassQuotient, SuiteConfig, fs1_verdicts, ha_identity_failures, i_prime_failures,
    literal_box_clause_holds, random_algebra_action, run_frames,
)

SMALL = SuiteConfig(max_worlds=2, max_agents=1, max_formula_depth=3, sample_count=5)


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suites_pass_at_small_bounds(name):
    cfg = SMALL if name != "soundness" else SuiteConfig(max_worlds=1, max_agents=1, sample_count=5)
    res = SUITES[name](cfg)
    assert res.passed, res.failures[:3]
    assert res.checked > 0
    json.dumps(res.to_json())


def test_config_validation():
    with pytest.raises(ValueError):
        SuiteConfig(max_worlds=5)
    with pytest.raises(ValueError):
        SuiteConfig(max_agents=0)
    with pytest.raises(ValueError):
        SuiteConfig(sample_count=-1)
    assert SuiteConfig(sample_count=7).samples(100) == 7
    assert SuiteConfig().samples(100) == 100


def test_broken_fixture_fails_frames_suite():
    broken = load_model(data_path("broken_frame.json")).frame
    res = run_frames(SuiteConfig(max_worlds=1, max_agents=1),
                     extra_frames=[("broken", broken, "ik")])
    assert not res.passed
    assert any("ik1" in f and "ik2" in f for f in res.failures)
    ok = run_frames(SuiteConfig(max_worlds=1, max_agents=1),
                    extra_frames=[("chain", load_model(data_path("chain2_frame.json")).frame, "ik")])
    assert ok.passed


def _three_chain_product(pre_mid):
    leq = np.array([[i <= j for j in range(3)] for i in range(3)])
    base = tense_adjoints(TableHAO.from_order(["0", "m", "1"], leq, {"a": np.array([0, 2, 2])},
                                              {"a": np.array([0, 0, 2])}))
    act = AlgebraAction(("s",), "s", {"a": {("s", "s")}}, {"s": 1 if pre_mid else 2})
    prod = ProductAlgebra(base, act)
    return prod, prod.table(), prod.encode(prod.pre)


def test_literal_box_clause_fails_below_top():
    # the right-hand side Pre -> box(Pre -> b) sits outside the class representatives
    _, pt, pre = _three_chain_product(pre_mid=True)
    assert not literal_box_clause_holds(pt, pre, "a")
    assert i_prime_failures(pt, pre, ["a"]) == []
    _, pt, pre = _three_chain_product(pre_mid=False)
    assert literal_box_clause_holds(pt, pre, "a")


@given(ik_frames(max_worlds=3), st.randoms(use_true_random=False))
def test_class_quotient_matches_representative_tables(fr, rng):
    alg = tense_adjoints(complex_algebra(fr, check=False))
    act = random_algebra_action(alg, ("a", "b"), 2, rng)
    prod = ProductAlgebra(alg, act)
    pt = prod.table()
    pre = prod.encode(prod.pre)
    cq = ClassQuotient(pt, pre)
    Q = QuotientAlgebra(prod)
    qt = Q.table()
    reps = [int(r) for r in Q.table_reps()]
    assert sorted(reps) == sorted(cq.i_prime(c) for c in range(len(cq.classes)))
    pos = {r: i for i, r in enumerate(reps)}
    for x, y in itertools.product(range(qt.n), repeat=2):
        cx, cy = cq.cls[reps[x]], cq.cls[reps[y]]
        assert cq.i_prime(cq.op(lambda f, g: int(pt.join_t[f, g]), cx, cy)) == reps[qt.join_t[x, y]]
        assert pos[cq.i_prime(cq.op(lambda f, g: int(pt.imp_t[f, g]), cx, cy))] == qt.imp_t[x, y]
    assert not i_prime_failures(pt, pre, alg.agents)


def test_ha_identities_detect_a_broken_implication():
    leq = np.array([[i <= j for j in range(3)] for i in range(3)])
    ident = np.arange(3)
    good = TableHAO.from_order(["0", "m", "1"], leq, {"a": ident}, {"a": ident})
    assert ha_identity_failures(good) == []
    bad_imp = good.imp_t.copy()
    bad_imp[2, 0] = 1  # top -> bottom should be bottom
    broken = TableHAO(good.lattice, bad_imp, good.dia_t, good.box_t)
    assert "x & (x -> y) <= y" in ha_identity_failures(broken)


def test_fs1_triple_on_complex_algebras_and_a_non_fs_algebra():
    fr = Frame.make(("x", "y"), {"a": {("x", "x"), ("y", "y"), ("x", "y")}}, [("x", "y")])
    assert fs1_verdicts(complex_algebra(fr), "a") == (True, True, True)
    # dia from a loop at the first atom, box constantly top: box x & dia ~x is not bottom
    leq = np.array([[(i & ~j) == 0 for j in range(4)] for i in range(4)])
    t = TableHAO.from_order(["00", "01", "10", "11"], leq, {"a": np.array([0, 1, 0, 1])},
                            {"a": np.array([3, 3, 3, 3])})
    v = fs1_verdicts(t, "a")
    assert len(set(v)) == 1 and not v[0]
