"""Measure how normal forms grow with modal depth and action nesting.

For each (modal depth, nesting) pair a formula <u>...<u> dia^d p is
normalized under a fully connected action on k points; the table compares
the output size with the static bound from the rewriter.
"""
import argparse
import time

from ieak.rewriter import RewriteError, normalize, size_bound
from ieak.syntax import ActionEnv, ActionRef, ActionStructure, Atom, Dia, DynDia, size


def action(k: int) -> ActionEnv:
    states = tuple(f"s{i}" for i in range(k))
    rel = {"a": {(x, y) for x in states for y in states}}
    pre = {s: Atom(f"r{i}") for i, s in enumerate(states)}
    return ActionEnv(("a",), {"u": ActionStructure("u", states, states[0], rel, pre)})


def formula(depth: int, nesting: int):
    phi = Atom("p")
    for _ in range(depth):
        phi = Dia("a", phi)
    for _ in range(nesting):
        phi = DynDia(ActionRef("u"), phi)
    return phi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--states", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--max-depth", type=int, default=5)
    ap.add_argument("--max-nesting", type=int, default=2)
    ap.add_argument("--max-steps", type=int, default=10**4)
    args = ap.parse_args()

    print(f"{'K':>2} {'depth':>5} {'nest':>4} {'input':>6} {'output':>8} {'bound':>10} {'steps':>7} {'sec':>6}")
    for k in args.states:
        env = action(k)
        for nest in range(1, args.max_nesting + 1):
            for d in range(args.max_depth + 1):
                phi = formula(d, nest)
                t = time.perf_counter()
                try:
                    nf, trace = normalize(phi, env, args.max_steps)
                except RewriteError:
                    print(f"{k:>2} {d:>5} {nest:>4} {size(phi):>6} {'-':>8} {size_bound(phi, env):>10} "
                          f"{'>' + str(args.max_steps):>7}")
                    continue
                dt = time.perf_counter() - t
                print(f"{k:>2} {d:>5} {nest:>4} {size(phi):>6} {size(nf):>8} {size_bound(phi, env):>10} "
                      f"{len(trace.steps):>7} {dt:>6.2f}")


if __name__ == "__main__":
    main()
