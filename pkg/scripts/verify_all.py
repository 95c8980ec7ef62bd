"""Run every property suite at the given bounds and write one JSON report per suite."""
import argparse
import json
from pathlib import Path

from ieak.suites import SUITES, SuiteConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-worlds", type=int, default=4)
    ap.add_argument("--soundness-worlds", type=int, default=3)
    ap.add_argument("--max-agents", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", nargs="+", choices=sorted(SUITES))
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = []
    for name in args.only or list(SUITES):
        worlds = args.soundness_worlds if name == "soundness" else args.max_worlds
        cfg = SuiteConfig(max_worlds=worlds, max_agents=args.max_agents, random_seed=args.seed)
        res = SUITES[name](cfg)
        (out / f"{name}.json").write_text(json.dumps(res.to_json(), indent=2))
        status = "ok" if res.passed else "FAILED"
        print(f"{name:16s} {status:6s} checked={res.checked:<10d} {res.seconds:7.1f}s")
        if not res.passed:
            failed.append(name)
            for f in res.failures[:5]:
                print("   ", f)
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
