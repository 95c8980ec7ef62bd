"""Formulas, action structures, and the concrete formula language.

Formulas are immutable trees. Negation, ``true``, bi-implication and the
"everybody knows" operator are macros: they are expanded by the parser and
by the helper constructors, so evaluators only ever see the core nodes.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Iterator, Mapping

IDENT = re.compile(r"[A-Za-z0-9_]+\Z")
KEYWORDS = frozenset({"true", "false", "box", "dia"})


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UnknownActionError(ParseError):
    pass


class UnknownPointError(ParseError):
    pass


class ActionEnvError(ValueError):
    pass


def _check_label(kind: str, name: str) -> None:
    if not isinstance(name, str) or not IDENT.match(name):
        raise ValueError(f"invalid {kind} label {name!r}")


class Formula:
    """Base class. Subclasses are frozen dataclasses with structural equality."""

    def _key(self) -> tuple:
        names = type(self).__dict__.get("_names")
        if names is None:
            names = tuple(f.name for f in fields(self))
            type.__setattr__(type(self), "_names", names)
        return tuple(getattr(self, n) for n in names)

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        if hash(self) != hash(other):
            return False
        return all(x is y or x == y for x, y in zip(self._key(), other._key()))

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True, eq=False)
class Atom(Formula):
    name: str

    def __post_init__(self):
        _check_label("atom", self.name)
        if self.name in KEYWORDS:
            raise ValueError(f"atom label {self.name!r} is a keyword")


@dataclass(frozen=True, eq=False)
class Bot(Formula):
    pass


@dataclass(frozen=True, eq=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False)
class Box(Formula):
    agent: str
    body: Formula

    def __post_init__(self):
        _check_label("agent", self.agent)


@dataclass(frozen=True, eq=False)
class Dia(Formula):
    agent: str
    body: Formula

    def __post_init__(self):
        _check_label("agent", self.agent)


@dataclass(frozen=True)
class ActionRef:
    """Reference to a declared action; ``point`` overrides the designated state."""

    name: str
    point: str | None = None

    def __str__(self) -> str:
        return self.name if self.point is None else f"{self.name}@{self.point}"


@dataclass(frozen=True, eq=False)
class DynDia(Formula):
    action: ActionRef
    body: Formula


@dataclass(frozen=True, eq=False)
class DynBox(Formula):
    action: ActionRef
    body: Formula


BOT = Bot()
TOP = Imp(BOT, BOT)
BINARY = (And, Or, Imp)
MODAL = (Box, Dia)
DYNAMIC = (DynDia, DynBox)


def top() -> Formula:
    return TOP


def neg(phi: Formula) -> Formula:
    return Imp(phi, BOT)


def iff(phi: Formula, psi: Formula) -> Formula:
    return And(Imp(phi, psi), Imp(psi, phi))


def big_and(items: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``true``."""
    items = list(items)
    if not items:
        return TOP
    out = items[-1]
    for phi in reversed(items[:-1]):
        out = And(phi, out)
    return out


def big_or(items: Iterable[Formula]) -> Formula:
    """Right-nested disjunction; the empty disjunction is ``false``."""
    items = list(items)
    if not items:
        return BOT
    out = items[-1]
    for phi in reversed(items[:-1]):
        out = Or(phi, out)
    return out


def everybody(agents: Iterable[str], phi: Formula) -> Formula:
    return big_and(Box(i, phi) for i in agents)


def children(phi: Formula) -> tuple[Formula, ...]:
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    if isinstance(phi, (Box, Dia, DynDia, DynBox)):
        return (phi.body,)
    return ()


def with_children(phi: Formula, kids: tuple[Formula, ...]) -> Formula:
    if isinstance(phi, BINARY):
        return type(phi)(kids[0], kids[1])
    if isinstance(phi, MODAL):
        return type(phi)(phi.agent, kids[0])
    if isinstance(phi, DYNAMIC):
        return type(phi)(phi.action, kids[0])
    return phi


def subformulas(phi: Formula) -> Iterator[Formula]:
    """Pre-order, left to right."""
    stack = [phi]
    while stack:
        f = stack.pop()
        yield f
        stack.extend(reversed(children(f)))


def is_static(phi: Formula) -> bool:
    return not any(isinstance(f, DYNAMIC) for f in subformulas(phi))


def atoms(phi: Formula) -> set[str]:
    return {f.name for f in subformulas(phi) if isinstance(f, Atom)}


def agents_of(phi: Formula) -> set[str]:
    return {f.agent for f in subformulas(phi) if isinstance(f, MODAL)}


def action_names(phi: Formula) -> set[str]:
    return {f.action.name for f in subformulas(phi) if isinstance(f, DYNAMIC)}


def size(phi: Formula) -> int:
    return sum(1 for _ in subformulas(phi))


def depth(phi: Formula) -> int:
    kids = children(phi)
    return 1 + max((depth(k) for k in kids), default=0)


def dynamic_depth(phi: Formula) -> int:
    kids = children(phi)
    inner = max((dynamic_depth(k) for k in kids), default=0)
    return inner + 1 if isinstance(phi, DYNAMIC) else inner


# ---------------------------------------------------------------- actions


@dataclass(frozen=True, eq=False)
class ActionStructure:
    name: str
    states: tuple[str, ...]
    designated: str
    rel: Mapping[str, frozenset[tuple[str, str]]]
    pre: Mapping[str, Formula]

    def __post_init__(self):
        _check_label("action", self.name)
        if not self.states:
            raise ActionEnvError(f"action {self.name}: no states")
        if len(set(self.states)) != len(self.states):
            raise ActionEnvError(f"action {self.name}: duplicate states")
        for s in self.states:
            _check_label("state", s)
        if self.designated not in self.states:
            raise UnknownPointError(f"action {self.name}: designated state {self.designated!r} not declared")
        rel = {}
        for agent, pairs in self.rel.items():
            _check_label("agent", agent)
            pairs = frozenset((i, j) for i, j in pairs)
            for i, j in pairs:
                if i not in self.states or j not in self.states:
                    raise ActionEnvError(f"action {self.name}: relation {agent} uses unknown state in {(i, j)}")
            rel[agent] = pairs
        object.__setattr__(self, "rel", rel)
        missing = set(self.states) - set(self.pre)
        extra = set(self.pre) - set(self.states)
        if missing or extra:
            raise ActionEnvError(f"action {self.name}: preconditions must cover exactly the states")
        object.__setattr__(self, "pre", dict(self.pre))

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(sorted(self.rel))

    def successors(self, agent: str, state: str) -> list[str]:
        pairs = self.rel.get(agent, frozenset())
        return [j for j in self.states if (state, j) in pairs]

    def predecessors(self, agent: str, state: str) -> list[str]:
        pairs = self.rel.get(agent, frozenset())
        return [i for i in self.states if (i, state) in pairs]

    def precondition(self) -> Formula:
        return self.pre[self.designated]

    def index(self, state: str) -> int:
        return self.states.index(state)


def shift_action(alpha: ActionStructure, j: str) -> ActionStructure:
    if j not in alpha.states:
        raise UnknownPointError(f"action {alpha.name} has no state {j!r}")
    if j == alpha.designated:
        return alpha
    return replace(alpha, designated=j)


@dataclass(frozen=True, eq=False)
class ActionEnv:
    """Named action declarations plus the agent set used by the ``E`` macro."""

    agents: tuple[str, ...] = ()
    actions: Mapping[str, ActionStructure] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "actions", dict(self.actions))
        for name, act in self.actions.items():
            if act.name != name:
                raise ActionEnvError(f"action declared as {name!r} is named {act.name!r}")
        self._check_references()

    def _check_references(self) -> None:
        graph = {}
        for name, act in self.actions.items():
            refs = set()
            for phi in act.pre.values():
                for f in subformulas(phi):
                    if isinstance(f, DYNAMIC):
                        self._check_ref(f.action)
                        refs.add(f.action.name)
            graph[name] = refs
        state: dict[str, int] = {}

        def visit(n: str, path: list[str]) -> None:
            if state.get(n) == 2:
                return
            if state.get(n) == 1:
                raise ActionEnvError("cyclic action references: " + " -> ".join(path + [n]))
            state[n] = 1
            for m in sorted(graph[n]):
                visit(m, path + [n])
            state[n] = 2

        for n in sorted(graph):
            visit(n, [])

    def _check_ref(self, ref: ActionRef) -> None:
        if ref.name not in self.actions:
            raise UnknownActionError(f"unknown action {ref.name!r}")
        if ref.point is not None and ref.point not in self.actions[ref.name].states:
            raise UnknownPointError(f"action {ref.name!r} has no state {ref.point!r}")

    def __getitem__(self, name: str) -> ActionStructure:
        try:
            return self.actions[name]
        except KeyError:
            raise UnknownActionError(f"unknown action {name!r}") from None

    def resolve(self, ref: ActionRef) -> ActionStructure:
        act = self[ref.name]
        return act if ref.point is None else shift_action(act, ref.point)

    def point(self, ref: ActionRef) -> str:
        act = self[ref.name]
        if ref.point is None:
            return act.designated
        if ref.point not in act.states:
            raise UnknownPointError(f"action {ref.name!r} has no state {ref.point!r}")
        return ref.point

    def ref(self, name: str, state: str) -> ActionRef:
        """Canonical reference to ``name`` shifted to ``state``."""
        act = self[name]
        return ActionRef(name) if state == act.designated else ActionRef(name, state)

    def pre(self, ref: ActionRef) -> Formula:
        return self[ref.name].pre[self.point(ref)]

    def with_action(self, act: ActionStructure) -> "ActionEnv":
        return ActionEnv(self.agents, {**self.actions, act.name: act})

    def all_atoms(self, phi: Formula) -> set[str]:
        """Atoms of ``phi`` and of every precondition reachable from it."""
        out, seen, todo = set(), set(), [phi]
        while todo:
            f = todo.pop()
            out |= atoms(f)
            for name in action_names(f) - seen:
                seen.add(name)
                todo.extend(self[name].pre.values())
        return out


def make_action(name, states, designated, rel, pre, env: ActionEnv | None = None) -> ActionStructure:
    """Build an action; string preconditions are parsed against ``env``."""
    parsed = {s: parse_formula(p, env) if isinstance(p, str) else p for s, p in pre.items()}
    return ActionStructure(name, tuple(states), designated, {a: frozenset(map(tuple, ps)) for a, ps in rel.items()}, parsed)


def build_env(agents: Iterable[str], specs: Iterable[Mapping]) -> ActionEnv:
    """Build an environment from declarations whose preconditions may mention each other.

    Each declaration has the keys of the action file format. Precondition text is
    parsed with every declared name in scope; cycles are rejected afterwards.
    """
    specs = list(specs)
    agents = tuple(agents)
    shapes = {}
    for s in specs:
        states = tuple(s["states"])
        shapes[s["name"]] = ActionStructure(
            s["name"], states, s.get("designated", states[0]), {}, {k: TOP for k in states}
        )
    scope = _Scope(agents, shapes)
    acts = {}
    for s in specs:
        states = tuple(s["states"])
        pre = {k: parse_formula(s["pre"][k], scope) if isinstance(s["pre"][k], str) else s["pre"][k]
               for k in s["pre"]}
        rel = {a: frozenset(tuple(p) for p in ps) for a, ps in s.get("rel", {}).items()}
        acts[s["name"]] = ActionStructure(s["name"], states, s.get("designated", states[0]), rel, pre)
    return ActionEnv(agents, acts)


class _Scope:
    """Parsing scope that knows names and states but not preconditions."""

    def __init__(self, agents, actions):
        self.agents = agents
        self.actions = actions


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(r"(?P<ws>\s+)|(?P<op><->|->|[~&|()\[\]<>@])|(?P<id>[A-Za-z0-9_]+)|(?P<bad>.)")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        col = m.start() - line_start + 1
        if kind == "ws":
            chunk = m.group()
            if "\n" in chunk:
                line += chunk.count("\n")
                line_start = m.start() + chunk.rindex("\n") + 1
            continue
        if kind == "bad":
            raise ParseError(f"unexpected character {m.group()!r}", line, col)
        out.append(Token(kind, m.group(), line, col))
    out.append(Token("eof", "", line, len(text) - line_start + 1))
    return out


_STARTS = {"~", "(", "[", "<"}


class _Parser:
    def __init__(self, text: str, env):
        self.toks = tokenize(text)
        self.i = 0
        self.env = env

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None, cls=ParseError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.column)

    def take(self, text: str | None = None, kind: str | None = None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            got = "end of input" if t.kind == "eof" else repr(t.text)
            raise self.error(f"expected {want}, got {got}")
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> Formula:
        phi = self.iff()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return phi

    def iff(self) -> Formula:
        phi = self.imp()
        while self.at("<->"):
            self.i += 1
            phi = iff(phi, self.imp())
        return phi

    def imp(self) -> Formula:
        phi = self.disj()
        if self.at("->"):
            self.i += 1
            return Imp(phi, self.imp())
        return phi

    def disj(self) -> Formula:
        phi = self.conj()
        while self.at("|"):
            self.i += 1
            phi = Or(phi, self.conj())
        return phi

    def conj(self) -> Formula:
        phi = self.unary()
        while self.at("&"):
            self.i += 1
            phi = And(phi, self.unary())
        return phi

    def starts_formula(self, tok: Token) -> bool:
        return tok.kind == "id" or (tok.kind == "op" and tok.text in _STARTS)

    def unary(self) -> Formula:
        t = self.tok
        if t.kind == "op":
            if t.text == "~":
                self.i += 1
                return neg(self.unary())
            if t.text == "(":
                self.i += 1
                phi = self.iff()
                self.take(")")
                return phi
            if t.text in ("[", "<"):
                self.i += 1
                ref = self.action_ref()
                self.take("]" if t.text == "[" else ">")
                body = self.unary()
                return DynBox(ref, body) if t.text == "[" else DynDia(ref, body)
            raise self.error(f"unexpected {t.text!r}")
        if t.kind == "eof":
            raise self.error("unexpected end of input")
        word = t.text
        if word in ("box", "dia"):
            self.i += 1
            agent = self.take(kind="id")
            if agent.text in KEYWORDS:
                raise self.error(f"invalid agent {agent.text!r}", agent)
            body = self.unary()
            return Box(agent.text, body) if word == "box" else Dia(agent.text, body)
        if word == "E" and self.starts_formula(self.toks[self.i + 1]):
            self.i += 1
            body = self.unary()
            agents = getattr(self.env, "agents", ()) if self.env is not None else ()
            if not agents:
                raise self.error("E used without a declared agent set", t)
            return everybody(agents, body)
        self.i += 1
        if word == "true":
            return TOP
        if word == "false":
            return BOT
        return Atom(word)

    def action_ref(self) -> ActionRef:
        name_tok = self.take(kind="id")
        point_tok = None
        if self.at("@"):
            self.i += 1
            point_tok = self.take(kind="id")
        actions = getattr(self.env, "actions", None) if self.env is not None else None
        if actions is None or name_tok.text not in actions:
            raise self.error(f"unknown action {name_tok.text!r}", name_tok, UnknownActionError)
        if point_tok is not None and point_tok.text not in actions[name_tok.text].states:
            raise self.error(
                f"action {name_tok.text!r} has no state {point_tok.text!r}", point_tok, UnknownPointError
            )
        return ActionRef(name_tok.text, point_tok.text if point_tok else None)


def parse_formula(text: str, env=None) -> Formula:
    """Parse concrete syntax. ``env`` supplies agents (for ``E``) and actions."""
    return _Parser(text, env).parse()


# ---------------------------------------------------------------- printer

_IFF, _IMP, _OR, _AND, _UNARY, _ATOM = range(6)


def _show(phi: Formula) -> tuple[str, int]:
    if isinstance(phi, Atom):
        return phi.name, _ATOM
    if isinstance(phi, Bot):
        return "false", _ATOM
    if phi == TOP:
        return "true", _ATOM
    if isinstance(phi, And):
        return f"{_wrap(phi.left, _AND)} & {_wrap(phi.right, _AND + 1)}", _AND
    if isinstance(phi, Or):
        return f"{_wrap(phi.left, _OR)} | {_wrap(phi.right, _OR + 1)}", _OR
    if isinstance(phi, Imp):
        return f"{_wrap(phi.left, _IMP + 1)} -> {_wrap(phi.right, _IMP)}", _IMP
    if isinstance(phi, Box):
        return f"box {phi.agent} {_wrap(phi.body, _UNARY)}", _UNARY
    if isinstance(phi, Dia):
        return f"dia {phi.agent} {_wrap(phi.body, _UNARY)}", _UNARY
    if isinstance(phi, DynBox):
        return f"[{phi.action}] {_wrap(phi.body, _UNARY)}", _UNARY
    if isinstance(phi, DynDia):
        return f"<{phi.action}> {_wrap(phi.body, _UNARY)}", _UNARY
    raise TypeError(f"not a formula: {phi!r}")


def _wrap(phi: Formula, need: int) -> str:
    text, prec = _show(phi)
    return text if prec >= need else f"({text})"


def print_formula(phi: Formula) -> str:
    return _show(phi)[0]
