import re

from ieak.dot import algebra_dot, model_dot, to_dot
from ieak.duality import complex_algebra
from ieak.io import data_path, load_actions, load_model
from ieak.relational import Frame, Model, product_update


def nodes(dot):
    return re.findall(r"^\s*(w\d+|e\d+) \[label=", dot, re.M)


def edges(dot, label):
    return re.findall(rf"^\s*(\w+) -> (\w+) \[label=\"{re.escape(label)}\"\];", dot, re.M)


def test_single_world():
    m = Model(Frame.classical(("x",), {"a": set()}), {"p": frozenset({"x"})}, "classical")
    dot = model_dot(m)
    assert nodes(dot) == ["w0"]
    assert 'label="x\\np"' in dot and "->" not in dot


def test_cards_update_has_expected_edges():
    m = load_model(data_path("cards_model.json"))
    env = load_actions(data_path("cards_actions.json"))
    assert len(nodes(model_dot(m))) == 3
    ma, _ = product_update(m, env["alpha"], env)
    dot = model_dot(ma, "updated")
    idx = {w: f"w{i}" for i, w in enumerate(ma.worlds)}
    gb, gc, ga = idx[("state1", "l")], idx[("state3", "l")], idx[("state2", "k")]
    c = set(edges(dot, "c"))
    a = set(edges(dot, "a"))
    assert (gb, gc) not in c and (gc, gb) not in c
    assert (ga, gb) in c and (gb, gc) in a
    assert edges(dot, "b") == [(w, w) for w in sorted(idx.values())]


def test_order_edges_are_hasse_covers():
    fr = Frame.make(("x", "y", "z"), {"a": set()}, [("x", "y"), ("y", "z")])
    dot = model_dot(fr)
    assert len(re.findall(r"style=dashed", dot)) == 2


def test_quoting():
    m = Model(Frame.classical(('say "hi"',), {"a": set()}), {}, "classical")
    assert 'label="say \\"hi\\""' in model_dot(m)


def test_algebra_hasse():
    alg = complex_algebra(Frame.make(("x", "y"), {"a": set()}))
    dot = algebra_dot(alg)
    assert "rankdir=BT" in dot and len(nodes(dot)) == 4
    assert dot.count(" -> ") == 4
    assert to_dot(alg) == dot
