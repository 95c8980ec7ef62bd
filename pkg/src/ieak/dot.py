"""Deterministic Graphviz DOT rendering of models, frames and algebras."""
from __future__ import annotations

from .algebra import TableHAO
from .io import _world_name
from .relational import Frame, Model


def _q(s: str) -> str:
    s = str(s).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return '"' + s + '"'


def model_dot(m: Model | Frame, name: str = "model") -> str:
    """Worlds labeled with their true atoms, agent edges labeled by agent, order edges dashed."""
    if isinstance(m, Frame):
        m = Model(m, {}, "ik")
    fr = m.frame
    ids = {w: f"w{i}" for i, w in enumerate(fr.worlds)}
    lines = [f"digraph {_q(name)} {{", "  node [shape=ellipse];"]
    for w in fr.worlds:
        atoms = sorted(m.atoms_true_at(w))
        label = _world_name(w) + ("\n" + ", ".join(atoms) if atoms else "")
        lines.append(f"  {ids[w]} [label={_q(label)}];")
    # drop pairs implied by transitivity so the order reads as a Hasse diagram
    strict = {(v, w) for v, w in fr.order if v != w}
    covers = sorted(
        (p for p in strict if not any((p[0], u) in strict and (u, p[1]) in strict for u in fr.worlds)),
        key=lambda p: (fr.index[p[0]], fr.index[p[1]]),
    )
    for v, w in covers:
        lines.append(f"  {ids[v]} -> {ids[w]} [style=dashed, arrowhead=none, label=\"<=\"];")
    for a in fr.agents:
        for v, w in sorted(fr.rel[a], key=lambda p: (fr.index[p[0]], fr.index[p[1]])):
            lines.append(f"  {ids[v]} -> {ids[w]} [label={_q(a)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def algebra_dot(alg: TableHAO, name: str = "algebra") -> str:
    """Hasse diagram of the lattice order, top drawn above bottom."""
    n = alg.n
    leq = alg.leq_t
    lines = [f"digraph {_q(name)} {{", "  rankdir=BT;", "  node [shape=box];"]
    for x in range(n):
        lines.append(f"  e{x} [label={_q(alg.labels[x])}];")
    for x in range(n):
        for y in range(n):
            if x != y and leq[x, y] and not any(z not in (x, y) and leq[x, z] and leq[z, y] for z in range(n)):
                lines.append(f"  e{x} -> e{y} [arrowhead=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_dot(obj, name: str | None = None) -> str:
    if isinstance(obj, TableHAO):
        return algebra_dot(obj, name or "algebra")
    return model_dot(obj, name or "model")
