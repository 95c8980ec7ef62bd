"""Command-line interface: ``ieak <subcommand> ...``.

Exit codes: 0 success, 1 a check or verification failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .algebra import AlgebraError, check_fsa, check_heyting, tense_adjoints
from .dot import to_dot
from .duality import complex_algebra, prime_structure
from .relational import EvaluationError, check_ik_frame, evaluate, product_update
from .rewriter import MAX_STEPS, RewriteError, normalize
from .scenario import run_cards
from .semantics import AlgebraicModel, ResourceBoundError, countervaluation, eval_algebraic
from .suites import SUITES, SuiteConfig
from .syntax import ActionEnv, ActionEnvError, ParseError, depth, dynamic_depth, parse_formula, size

OK, FAILED, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _emit(args, payload, text: str) -> None:
    out = json.dumps(payload, indent=2, sort_keys=True) + "\n" if args.json else text.rstrip("\n") + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)


def _env(args, agents=()) -> ActionEnv:
    files = getattr(args, "actions", None) or []
    if files:
        return io.load_actions(*files, agents=list(agents))
    return ActionEnv(tuple(agents), {})


def _fmt_set(ws) -> str:
    return "{" + ", ".join(sorted(io._world_name(w) for w in ws)) + "}"


# ------------------------------------------------------------- subcommands


def cmd_parse(args) -> int:
    env = _env(args, args.agents.split(",") if args.agents else ())
    phi = parse_formula(args.formula, env)
    info = {"formula": str(phi), "size": size(phi), "depth": depth(phi), "dynamic_depth": dynamic_depth(phi)}
    _emit(args, info, str(phi))
    return OK


def cmd_eval(args) -> int:
    model = io.load_model(args.model)
    env = _env(args, model.frame.agents)
    phi = parse_formula(args.formula, env)
    ext = evaluate(model, env, phi)
    payload = {"formula": str(phi), "kind": model.kind, "extension": sorted(io._world_name(w) for w in ext)}
    if args.world is not None:
        payload["holds"] = args.world in {io._world_name(w) for w in ext}
    _emit(args, payload, _fmt_set(ext) if args.world is None else str(payload["holds"]).lower())
    return OK


def _parse_val(alg, items) -> dict:
    pos = {lab: i for i, lab in enumerate(alg.labels)}
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"valuation entry {item!r} is not of the form atom=element")
        p, x = item.split("=", 1)
        if x not in pos:
            raise InputError(f"unknown algebra element {x!r}")
        out[p] = pos[x]
    return out


def cmd_eval_alg(args) -> int:
    alg = io.load_algebra(args.algebra)
    env = _env(args, alg.agents)
    phi = parse_formula(args.formula, env)
    if args.expect == "top":
        cv = countervaluation(alg, env, phi, args.cap)
        payload = {"formula": str(phi), "valid": cv is None,
                   "countervaluation": None if cv is None else {p: alg.labels[x] for p, x in cv.items()}}
        text = "valid" if cv is None else "refuted by " + ", ".join(f"{p}={alg.labels[x]}" for p, x in cv.items())
        _emit(args, payload, text)
        return OK if cv is None else FAILED
    model = AlgebraicModel(alg, _parse_val(alg, args.val))
    try:
        x = eval_algebraic(model, env, phi)
    except EvaluationError as e:
        raise InputError(str(e)) from None
    _emit(args, {"formula": str(phi), "value": alg.labels[x]}, alg.labels[x])
    return OK


def cmd_update(args) -> int:
    model = io.load_model(args.model)
    env = _env(args, model.frame.agents)
    names = args.action or list(env.actions)
    if not names:
        raise InputError("no action to apply")
    for name in names:
        try:
            act = env[name]
        except KeyError:
            raise InputError(f"unknown action {name!r}") from None
        model, _ = product_update(model, act, env)
    payload = io.model_to_json(model)
    _emit(args, payload, json.dumps(payload, indent=2, sort_keys=True))
    return OK


def cmd_normalize(args) -> int:
    env = _env(args)
    phi = parse_formula(args.formula, env)
    try:
        nf, trace = normalize(phi, env, args.max_steps)
    except RewriteError as e:
        _emit(args, {"formula": str(phi), "error": str(e)}, f"error: {e}")
        return FAILED
    payload = {"formula": str(phi), "normal_form": str(nf), "steps": len(trace.steps)}
    lines = []
    if args.trace:
        payload["trace"] = trace.to_json()
        lines = [f"{i + 1:4d} {s.axiom:8s} at {list(s.path)}: {s.before}  =>  {s.after}" for i, s in enumerate(trace.steps)]
    _emit(args, payload, "\n".join(lines + [str(nf)]))
    return OK


def cmd_check_frame(args) -> int:
    model = io.load_model(args.model)
    mode = args.mode or model.kind
    fr = model.frame
    if mode == "classical":
        rows = [] if fr.is_discrete else ["order is not discrete"]
    else:
        rows = [str(v) for v in check_ik_frame(fr, mode).violations]
    _emit(args, {"mode": mode, "ok": not rows, "violations": rows}, "ok" if not rows else "\n".join(rows))
    return OK if not rows else FAILED


def cmd_check_algebra(args) -> int:
    alg = io.load_algebra(args.algebra)
    ha = check_heyting(alg)
    rep = check_fsa(alg, args.mode)
    rows = [f"{c} agent {a}: {[alg.labels[i] for i in w]}" for c, a, w in rep.violations]
    rows += [f"heyting {c}: {w}" for c, _, w in ha.violations]
    payload = {"mode": args.mode, "ok": rep.ok and ha.ok, **rep.to_json(), "heyting": ha.to_json()}
    payload["ok"] = rep.ok and ha.ok
    _emit(args, payload, "ok" if not rows else "\n".join(rows))
    return OK if not rows else FAILED


def cmd_dualize(args) -> int:
    kind, obj = io.load_any(args.file)
    if kind == "model":
        out = io.algebra_to_json(complex_algebra(obj.frame))
    else:
        try:
            out = io.frame_to_json(prime_structure(tense_adjoints(obj)))
        except AlgebraError as e:
            raise InputError(str(e)) from None
    _emit(args, out, json.dumps(out, indent=2, sort_keys=True))
    return OK


def cmd_export_dot(args) -> int:
    _, obj = io.load_any(args.file)
    text = to_dot(obj, Path(args.file).stem)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_scenario(args) -> int:
    rep = run_cards(args.max_worlds, args.ik_samples, args.seed)
    payload = rep.to_json()
    text = "\n".join([
        "cards scenario (semantic check of E(other?) |- [alpha][beta] box_c Ga under aut and one)",
        f"figures: {'ok' if not rep.figure_failures else '; '.join(rep.figure_failures)}",
        f"fast path cross-check: {'ok' if not rep.cross_check_failures else rep.cross_check_failures[0]}",
        f"classical models: {rep.classical_models}",
        f"ik models: {rep.ik_models} (skipped {rep.skipped})",
        f"worlds satisfying the premise: {rep.premise_worlds}",
        f"counterexamples: {len(rep.counterexamples)}",
        f"{'PASS' if rep.passed else 'FAIL'} in {rep.seconds:.1f}s",
    ])
    _emit(args, payload, text)
    return OK if rep.passed else FAILED


def cmd_verify(args) -> int:
    try:
        cfg = SuiteConfig(args.max_worlds, args.max_action_states, args.max_agents, args.max_formula_depth,
                          args.seed, args.samples)
    except ValueError as e:
        raise InputError(str(e)) from None
    kw = {}
    if args.fixture:
        if args.suite != "frames":
            raise InputError("--fixture only applies to the frames suite")
        fixtures = []
        for f in args.fixture:
            m = io.load_model(f)
            fixtures.append((Path(f).name, m.frame, "mipc" if m.kind == "mipc" else "ik"))
        kw["extra_frames"] = fixtures
    res = SUITES[args.suite](cfg, **kw)
    lines = [f"{res.name}: {'PASS' if res.passed else 'FAIL'} ({res.checked} checks, {res.seconds:.1f}s)"]
    lines += [f"  {k}: {v}" for k, v in res.details.items()]
    lines += [f"  failure: {f}" for f in res.failures[:20]]
    _emit(args, res.to_json(), "\n".join(lines))
    return OK if res.passed else FAILED


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ieak", description="Intuitionistic dynamic epistemic logic toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("-o", "--output", help="write output to a file")
        return sp

    sp = add("parse", cmd_parse, "parse and pretty-print a formula")
    sp.add_argument("formula")
    sp.add_argument("--actions", action="append", metavar="FILE", help="action file (repeatable)")
    sp.add_argument("--agents", help="comma-separated agents for the E macro")

    sp = add("eval", cmd_eval, "extension of a formula in a relational model")
    sp.add_argument("formula")
    sp.add_argument("--model", required=True)
    sp.add_argument("--actions", action="append", metavar="FILE")
    sp.add_argument("--world", help="report whether the formula holds at this world")

    sp = add("eval-alg", cmd_eval_alg, "value of a formula in an algebraic model")
    sp.add_argument("formula")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--actions", action="append", metavar="FILE")
    sp.add_argument("--val", action="append", metavar="ATOM=ELEMENT", help="valuation entry (repeatable)")
    sp.add_argument("--expect", choices=["top"], help="check validity over all valuations")
    sp.add_argument("--cap", type=int, default=10**7, help="maximum number of valuations")

    sp = add("update", cmd_update, "product update of a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--actions", action="append", metavar="FILE", required=True)
    sp.add_argument("--action", action="append", help="action to apply (repeatable, in order)")

    sp = add("normalize", cmd_normalize, "eliminate dynamic modalities by the reduction axioms")
    sp.add_argument("formula")
    sp.add_argument("--actions", action="append", metavar="FILE")
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--max-steps", type=int, default=MAX_STEPS)

    sp = add("check-frame", cmd_check_frame, "check the frame conditions of a model file")
    sp.add_argument("--model", required=True)
    sp.add_argument("--mode", choices=["ik", "mipc", "classical"])

    sp = add("check-algebra", cmd_check_algebra, "check the FSA (or MHA) conditions of an algebra")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--mode", choices=["fsa", "mha"], default="fsa")

    sp = add("dualize", cmd_dualize, "complex algebra of a frame, or prime structure of an algebra")
    sp.add_argument("file")

    sp = add("export-dot", cmd_export_dot, "render a model, frame or algebra as DOT")
    sp.add_argument("file")

    sp = add("scenario", cmd_scenario, "built-in scenarios")
    sp.add_argument("name", choices=["cards"])
    sp.add_argument("--max-worlds", type=int, default=3)
    sp.add_argument("--ik-samples", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("verify", cmd_verify, "run a property suite")
    sp.add_argument("suite", choices=sorted(SUITES))
    d = SuiteConfig()
    sp.add_argument("--max-worlds", type=int, default=d.max_worlds)
    sp.add_argument("--max-action-states", type=int, default=d.max_action_states)
    sp.add_argument("--max-agents", type=int, default=d.max_agents)
    sp.add_argument("--max-formula-depth", type=int, default=d.max_formula_depth)
    sp.add_argument("--seed", type=int, default=d.random_seed)
    sp.add_argument("--samples", type=int, default=d.sample_count, help="0 keeps each suite's default")
    sp.add_argument("--fixture", nargs="*", help="extra frame files (frames suite)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return BAD_INPUT if e.code else OK
    try:
        return args.func(args)
    except (InputError, ParseError, ActionEnvError, io.FormatError, EvaluationError, ResourceBoundError,
            AlgebraError, FileNotFoundError, IsADirectoryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
