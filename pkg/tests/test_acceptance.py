"""The eight acceptance criteria at their stated bounds.

Each test appends one PASS/FAIL line to the acceptance section printed at
the end of the run. Runtime limits are part of the verdict.
"""
import time

import pytest

from ieak.io import data_path, load_actions, load_model
from ieak.scenario import figure_failures, run_cards
from ieak.suites import (
    EAK_AXIOMS, IEAK_AXIOMS, SuiteConfig, run_agreement, run_algebra_closure, run_appendix, run_duality,
    run_rewriter, run_soundness,
)

pytestmark = pytest.mark.slow

FULL = SuiteConfig(max_worlds=4, max_action_states=2, max_agents=2, max_formula_depth=4, random_seed=0)


def record(log, number, title, ok, detail, seconds, limit=None):
    in_time = limit is None or seconds < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    budget = f" (limit {limit:g}s)" if limit is not None else ""
    line = f"[{verdict}] {number}. {title}: {detail}; {seconds:.1f}s{budget}"
    log.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def _failures(res):
    return f"{res.failure_count} failures" + (f", first: {res.failures[0]}" if res.failures else "")


def test_1_example_regression(acceptance_log):
    t = time.perf_counter()
    fails = figure_failures(load_model(data_path("cards_model.json")), load_actions(data_path("cards_actions.json")))
    record(acceptance_log, 1, "example update figures", not fails,
           "6 / 3 / 1 worlds and edges match" if not fails else "; ".join(fails), time.perf_counter() - t, 1)


def test_2_reduction_axiom_soundness(acceptance_log):
    res = run_soundness(SuiteConfig(max_worlds=3, max_action_states=2, max_agents=2, random_seed=0))
    d = res.details
    schemas = set(d["schemas"])
    ok = res.passed and schemas == set(IEAK_AXIOMS + EAK_AXIOMS)
    detail = (f"{len(IEAK_AXIOMS)} intuitionistic + {len(EAK_AXIOMS)} classical schemas, {res.checked} instances, "
              f"{d['classical-models']} classical models (all up to {d['classical-exhaustive-upto']} worlds, "
              f"sampled at 3), {d['ik-models']} IK models over every poset up to 3 points "
              f"(all relations up to {d['ik-exhaustive-upto']} point, sampled beyond), "
              f"{d['actions-per-model']} sampled actions per model, {_failures(res)}")
    record(acceptance_log, 2, "reduction axiom soundness", ok, detail, res.seconds, 300)


def test_3_closure_suite(acceptance_log):
    res = run_algebra_closure(FULL)
    d = res.details
    detail = (f"{d.get('product-fsa', 0)}+{d.get('product-mha', 0)} products, "
              f"{d.get('quotient-fsa', 0)}+{d.get('quotient-mha', 0)} quotients (FSA+MHA), "
              f"{d.get('product-adjunctions', 0) + d.get('quotient-adjunctions', 0)} adjunction checks, "
              f"{_failures(res)}")
    record(acceptance_log, 3, "FSA/MHA closure of products and quotients", res.passed, detail, res.seconds)


def test_4_duality_suite(acceptance_log):
    res = run_duality(FULL)
    d = res.details
    detail = (f"{d.get('frame-roundtrip', 0)} frame round trips, {d.get('product-dual', 0)} product duals, "
              f"{d.get('update-dual', 0)} update duals, {_failures(res)}")
    record(acceptance_log, 4, "duality of frames, products and updates", res.passed, detail, res.seconds, 600)


def test_5_agreement(acceptance_log):
    res = run_agreement(FULL)
    d = res.details
    ok = res.passed and d["triples"] == 1000 and d["dynamic-formulas"] > 0
    detail = f"{d['triples']} triples ({d['dynamic-formulas']} dynamic), {_failures(res)}"
    record(acceptance_log, 5, "relational vs algebraic agreement", ok, detail, res.seconds)


def test_6_normalizer(acceptance_log):
    res = run_rewriter(SuiteConfig(max_worlds=3, max_action_states=2, max_agents=2, max_formula_depth=4))
    d = res.details
    ok = res.passed and d.get("normalized") == 200
    detail = (f"{d.get('normalized', 0)} formulas normalized, at most {d.get('max-steps')} steps, "
              f"{d.get('models', 0)} model comparisons, {_failures(res)}")
    record(acceptance_log, 6, "normalizer", ok, detail, res.seconds)


def test_7_cards_scenario(acceptance_log):
    rep = run_cards(max_worlds=3, ik_samples=500, seed=0)
    detail = (f"{rep.classical_models} classical models (exhaustive, fast path cross-checked), "
              f"{rep.ik_models} IK models, {rep.premise_worlds} premise worlds, "
              f"{len(rep.counterexamples)} counterexamples")
    if rep.figure_failures or rep.cross_check_failures:
        detail += f", figure/cross-check failures: {rep.figure_failures + rep.cross_check_failures}"
    record(acceptance_log, 7, "cards scenario", rep.passed, detail, rep.seconds, 600)


def test_8_appendix_suites(acceptance_log):
    res = run_appendix(FULL)
    d = res.details
    detail = (f"{d.get('ha-identities', 0)} algebras for HA identities, {d.get('fs1-triple', 0)} FS1 triples, "
              f"{d.get('i-prime-clauses', 0)} action updates for the i' clauses, {_failures(res)}")
    record(acceptance_log, 8, "appendix identities", res.passed, detail, res.seconds)
