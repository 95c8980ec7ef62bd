import itertools
import random

import numpy as np
import pytest

from ieak.relational import extension_mask
from ieak.scenario import (
    _tables, cards_formulas, classical_cards_model, classical_counterexamples, classical_masks, cross_check,
    figure_failures, random_ik_cards_model, run_cards,
)


@pytest.fixture(scope="module")
def formulas():
    return cards_formulas()


def test_figures():
    assert figure_failures() == []


def test_fast_path_agrees_with_evaluator(formulas):
    assert cross_check(samples=60, seed=3, formulas=formulas) == []


def test_exhaustive_scan_up_to_two_worlds():
    for n in (1, 2):
        scanned, premised, found = classical_counterexamples(n)
        assert scanned == 3 ** n * (1 << (n * n)) ** 3
        assert premised > 0
        assert found == []


def test_conclusion_is_not_valid_without_the_premise(formulas):
    # a has no information: the conclusion fails somewhere once the premise is dropped
    tabs = _tables(2)
    full = np.int64(0b1111)
    holders = list(itertools.product(range(3), repeat=2))
    failing = []
    for h in holders:
        prem, concl = classical_masks(2, h, full, full, full, tabs)
        if int(concl) != 0b11:
            failing.append((h, int(prem), int(concl)))
    assert failing
    h, prem, concl = failing[0]
    m = classical_cards_model(2, h, 15, 15, 15)
    assert extension_mask(m, formulas.env, formulas.conclusion) == concl
    assert prem & ~concl == 0


def test_ik_models_satisfy_aut_and_one(formulas):
    rng = random.Random(1)
    for _ in range(20):
        m = random_ik_cards_model(rng, 3)
        assert extension_mask(m, formulas.env, formulas.aut) == m.frame.full
        assert extension_mask(m, formulas.env, formulas.one) == m.frame.full


def test_small_run_report():
    rep = run_cards(max_worlds=2, ik_samples=25, seed=0, cross_samples=20)
    assert rep.passed
    assert rep.ik_models == 25 and rep.classical_models == 3 * 8 + 9 * 4096
    d = rep.to_json()
    assert d["counterexamples"] == [] and "semantic" in d["method"]
