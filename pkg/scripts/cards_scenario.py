"""Cards scenario: figure regression, exhaustive classical scan and IK samples.

Prints a summary and writes the full report as JSON.
"""
import argparse
import json
from pathlib import Path

from ieak.io import data_path, load_actions, load_model
from ieak.relational import coproduct_model, product_update
from ieak.scenario import run_cards


def show_updates():
    m = load_model(data_path("cards_model.json"))
    env = load_actions(data_path("cards_actions.json"))
    print("intermediate structure:", len(coproduct_model(m, env["alpha"]).worlds), "worlds")
    ma, _ = product_update(m, env["alpha"], env)
    for w in ma.worlds:
        print("  M^alpha world", w, ma.atoms_true_at(w))
    mab, _ = product_update(ma, env["beta"], env)
    for w in mab.worlds:
        print("  final world", w, mab.atoms_true_at(w))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-worlds", type=int, default=3)
    ap.add_argument("--ik-samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/cards.json")
    args = ap.parse_args()

    show_updates()
    rep = run_cards(args.max_worlds, args.ik_samples, args.seed)
    print(f"classical models scanned: {rep.classical_models}")
    print(f"IK models: {rep.ik_models} (rejected draws: {rep.skipped})")
    print(f"premise worlds: {rep.premise_worlds}")
    print(f"counterexamples: {len(rep.counterexamples)}")
    print(f"time: {rep.seconds:.1f}s")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(rep.to_json(), indent=2))
    raise SystemExit(0 if rep.passed else 1)


if __name__ == "__main__":
    main()
