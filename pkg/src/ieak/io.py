"""JSON formats for models, actions and algebras."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import AlgebraError, TableHAO
from .relational import Frame, Model, reflexive_transitive_closure
from .syntax import ActionEnv, build_env, print_formula


class FormatError(ValueError):
    pass


def _read(src) -> Any:
    if isinstance(src, (dict, list)):
        return src
    try:
        return json.loads(Path(src).read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{src}: invalid JSON ({e})") from None


def data_path(name: str) -> Path:
    return Path(str(resources.files("ieak") / "data" / name))


def load_model(src) -> Model:
    d = _read(src)
    try:
        kind = d.get("kind", "ik")
        worlds = tuple(d["worlds"])
        rel = {a: [tuple(p) for p in ps] for a, ps in d.get("rel", {}).items()}
        for a in d.get("agents", []):
            rel.setdefault(a, [])
        if kind == "classical":
            if any(v != w for v, w in d.get("order", [])):
                raise FormatError("classical models take no order")
            frame = Frame.classical(worlds, rel)
        else:
            frame = Frame(worlds, reflexive_transitive_closure(worlds, [tuple(p) for p in d.get("order", [])]), rel)
        return Model(frame, {p: frozenset(ws) for p, ws in d.get("val", {}).items()}, kind)
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed model file: {e}") from None
    except ValueError as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(str(e)) from None


def model_to_json(m: Model) -> dict:
    fr = m.frame
    name = {w: _world_name(w) for w in fr.worlds}
    out = {
        "kind": m.kind,
        "agents": list(fr.agents),
        "worlds": [name[w] for w in fr.worlds],
        "rel": {a: sorted([name[v], name[w]] for v, w in fr.rel[a]) for a in fr.agents},
        "val": {p: sorted(name[w] for w in ws) for p, ws in sorted(m.val.items())},
    }
    if m.kind != "classical":
        out["order"] = sorted([name[v], name[w]] for v, w in fr.order if v != w)
    return out


def frame_to_json(fr: Frame, kind: str = "ik") -> dict:
    return model_to_json(Model(fr, {}, kind))


def _world_name(w) -> str:
    if isinstance(w, tuple):
        return "(" + ",".join(_world_name(x) for x in w) + ")"
    return str(w)


def load_actions(*sources, agents=None) -> ActionEnv:
    """Load one or more action files into a single environment.

    A file holds either one action object or ``{"agents": [...], "actions": [...]}``.
    """
    specs, ags = [], list(agents or [])
    for src in sources:
        d = _read(src)
        if isinstance(d, dict) and "actions" in d:
            specs.extend(d["actions"])
            ags += [a for a in d.get("agents", []) if a not in ags]
        elif isinstance(d, list):
            specs.extend(d)
        else:
            specs.append(d)
    for s in specs:
        for a in s.get("rel", {}):
            if a not in ags:
                ags.append(a)
    try:
        return build_env(ags, specs)
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed action file: {e}") from None


def actions_to_json(env: ActionEnv) -> dict:
    return {
        "agents": list(env.agents),
        "actions": [
            {"name": a.name, "states": list(a.states), "designated": a.designated,
             "rel": {ag: sorted(map(list, ps)) for ag, ps in sorted(a.rel.items())},
             "pre": {k: print_formula(a.pre[k]) for k in a.states}}
            for a in env.actions.values()
        ],
    }


def load_algebra(src) -> TableHAO:
    d = _read(src)
    try:
        labels = [str(x) for x in d["elements"]]
        pos = {x: i for i, x in enumerate(labels)}
        pairs = [(str(x), str(y)) for x, y in d["leq"]]
        closed = reflexive_transitive_closure(tuple(labels), pairs)
        n = len(labels)
        leq = np.zeros((n, n), dtype=bool)
        for x, y in closed:
            leq[pos[x], pos[y]] = True
        agents = sorted(set(d.get("dia", {})) | set(d.get("box", {})))
        dia, box = {}, {}
        for a in agents:
            dm = d.get("dia", {}).get(a)
            bm = d.get("box", {}).get(a)
            if dm is None or bm is None:
                raise FormatError(f"agent {a} needs both dia and box tables")
            dia[a] = np.array([pos[str(dm[x])] for x in labels])
            box[a] = np.array([pos[str(bm[x])] for x in labels])
        return TableHAO.from_order(labels, leq, dia, box)
    except KeyError as e:
        raise FormatError(f"malformed algebra file: missing {e}") from None
    except AlgebraError as e:
        raise FormatError(str(e)) from None


def algebra_to_json(alg: TableHAO) -> dict:
    lab = alg.labels
    n = alg.n
    # covering pairs are enough to regenerate the order
    covers = []
    for x in range(n):
        for y in range(n):
            if x != y and alg.leq_t[x, y] and not any(
                z not in (x, y) and alg.leq_t[x, z] and alg.leq_t[z, y] for z in range(n)
            ):
                covers.append([lab[x], lab[y]])
    return {
        "elements": list(lab),
        "leq": covers,
        "dia": {a: {lab[x]: lab[int(alg.dia_t[a][x])] for x in range(n)} for a in alg.agents},
        "box": {a: {lab[x]: lab[int(alg.box_t[a][x])] for x in range(n)} for a in alg.agents},
    }


def load_any(src) -> tuple[str, Any]:
    """Detect whether a file holds a model/frame or an algebra."""
    d = _read(src)
    if "elements" in d:
        return "algebra", load_algebra(d)
    if "worlds" in d:
        return "model", load_model(d)
    raise FormatError("file is neither a model nor an algebra")
