"""Explicit state graphs: refusal transition systems and their reductions."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from fase.errors import CapExceeded, NotResponseProcess
from fase.semantics import Semantics
from fase.syntax import pretty
from fase.terms import (
    IN,
    OMEGA,
    OUT,
    TAU,
    Par,
    SyncSet,
    Term,
    require_process,
    seq,
    sort,
)

DEFAULT_CAP = 200_000
RESPONSE_ACTIONS = frozenset([IN, OUT])

RTS, RRTS, COMPOSED = "RTS", "RRTS", "COMPOSED"


@dataclass(frozen=True)
class Act:
    label: str

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class Time:
    refusal: frozenset
    full: bool

    def __str__(self):
        return "t:FULL" if self.full else "t:{" + ",".join(sorted(self.refusal)) + "}"


@dataclass(frozen=True)
class Edge:
    src: int
    label: object
    dst: int

    @property
    def is_time(self) -> bool:
        return isinstance(self.label, Time)

    @property
    def action(self) -> Optional[str]:
        return self.label.label if isinstance(self.label, Act) else None


@dataclass
class StateGraph:
    nodes: list
    edges: list
    kind: str
    universe: frozenset
    initial: int = 0
    balance: Optional[list] = None
    _out: Optional[list] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def e(self) -> int:
        return len(self.edges)

    def out_edges(self, v: int) -> list:
        if self._out is None:
            out = [[] for _ in self.nodes]
            for i, edge in enumerate(self.edges):
                out[edge.src].append(i)
            self._out = out
        return [self.edges[i] for i in self._out[v]]

    def time_edge(self, v: int) -> Optional[Edge]:
        for edge in self.out_edges(v):
            if edge.is_time:
                return edge
        return None

    def index(self, term: Term) -> int:
        return self.nodes.index(term)

    def stats(self) -> dict:
        return {"n": self.n, "e": self.e}


def _explore(root, cap, sem, kind, keep_action=None, full_only=False):
    universe = sort(root)
    index = {root: 0}
    nodes = [root]
    edges = []
    queue = deque([0])

    def visit(term):
        i = index.get(term)
        if i is None:
            i = len(nodes)
            if i >= cap:
                raise CapExceeded("state-cap", cap)
            index[term] = i
            nodes.append(term)
            queue.append(i)
        return i

    try:
        _bfs(nodes, edges, queue, visit, universe, sem, keep_action, full_only)
    except RecursionError:
        # terms grow without bound when recursion runs through a parallel
        # composition; report it like any other state explosion
        raise CapExceeded("state-cap", len(nodes)) from None
    return StateGraph(nodes, edges, kind, universe)


def _bfs(nodes, edges, queue, visit, universe, sem, keep_action, full_only):
    while queue:
        v = queue.popleft()
        term = nodes[v]
        for label, target in sem.actions(term):
            if keep_action is not None and not keep_action(label):
                continue
            edges.append(Edge(v, Act(label), visit(target)))
        step = sem.time(term)
        if step is not None:
            blocked, target = step
            if full_only and blocked:
                continue
            edges.append(Edge(v, Time(universe - blocked, not blocked), visit(target)))


def build_rts(p: Term, cap: int = DEFAULT_CAP, sem: Optional[Semantics] = None) -> StateGraph:
    """Breadth-first refusal transition system of ``p``.

    Every node carries at most one time edge, labelled with its maximal
    refusal set and whether the step is full.
    """
    require_process(p)
    return _explore(p, cap, sem or Semantics(), RTS)


def validate_response(g: StateGraph) -> list:
    """Per-node balance (#in - #out) of a response process.

    Raises :class:`NotResponseProcess` on a visible action other than
    ``in``/``out``, a negative balance, or a node reached with two different
    balances.
    """
    balance = [None] * g.n
    balance[g.initial] = 0
    queue = deque([g.initial])
    while queue:
        v = queue.popleft()
        for edge in g.out_edges(v):
            label = edge.action
            if label is None or label == TAU:
                delta = 0
            elif label == IN:
                delta = 1
            elif label == OUT:
                delta = -1
            else:
                raise NotResponseProcess(
                    "foreign-action", f"visible action {label!r} at node {v}", v
                )
            b = balance[v] + delta
            if b < 0:
                raise NotResponseProcess(
                    "negative-balance", f"more out's than in's reaching node {edge.dst}", edge.dst
                )
            old = balance[edge.dst]
            if old is None:
                balance[edge.dst] = b
                queue.append(edge.dst)
            elif old != b:
                raise NotResponseProcess(
                    "inconsistent-balance",
                    f"node {edge.dst} reached with balances {old} and {b}",
                    edge.dst,
                )
    return balance


def admissible(refusal, balance: int) -> bool:
    """Whether a reduced time step can occur next to some user.

    With no pending request the user insists on ``in``; otherwise it insists
    on ``out``. A time step refusing neither demand never happens in a
    composed run.
    """
    return (IN in refusal) if balance == 0 else (OUT in refusal)


def rrts_from_rts(rts: StateGraph, balance: Optional[list] = None) -> StateGraph:
    balance = validate_response(rts) if balance is None else balance
    kept = {}
    for v in range(rts.n):
        out = []
        for edge in rts.out_edges(v):
            if edge.is_time:
                # names outside the sort are always refusable
                blocked = rts.universe - edge.label.refusal
                reduced = RESPONSE_ACTIONS - blocked
                if not admissible(reduced, balance[v]):
                    continue
                out.append((Time(reduced, edge.label.full), edge.dst))
            else:
                out.append((edge.label, edge.dst))
        kept[v] = out

    # renumber breadth-first over the kept edges; nodes only reachable
    # through pruned time steps disappear
    order = {rts.initial: 0}
    queue = deque([rts.initial])
    while queue:
        v = queue.popleft()
        for _, dst in kept[v]:
            if dst not in order:
                order[dst] = len(order)
                queue.append(dst)
    nodes = [None] * len(order)
    bal = [0] * len(order)
    for old, new in order.items():
        nodes[new] = rts.nodes[old]
        bal[new] = balance[old]
    edges = []
    for old in sorted(order, key=order.get):
        for label, dst in kept[old]:
            edges.append(Edge(order[old], label, order[dst]))
    return StateGraph(nodes, edges, RRTS, rts.universe, 0, bal)


def build_rrts(p: Term, cap: int = DEFAULT_CAP, sem: Optional[Semantics] = None) -> StateGraph:
    """Reduced refusal transition system of a response process.

    Action edges are kept (only ``in``, ``out`` and ``tau`` occur after
    validation); time edges keep their refusal restricted to ``{in, out}``
    and their fullness flag, and inadmissible ones are dropped.
    """
    return rrts_from_rts(build_rts(p, cap, sem))


def make_user(n: int) -> Term:
    """The user issuing ``n`` urgent requests and succeeding after all answers."""
    if n < 1:
        raise ValueError("users are defined for n >= 1")
    one = seq("_" + IN, "_" + OUT, "_" + OMEGA)
    user = one
    for _ in range(n - 1):
        user = Par(user, SyncSet.finite([OMEGA]), one)
    return user


def compose(p: Term, o: Term) -> Term:
    """Embed ``p`` into test environment ``o``, synchronising on all but omega."""
    return Par(p, SyncSet.all_except([OMEGA]), o)


def build_test_graph(p: Term, o: Term, cap: int = DEFAULT_CAP, sem=None) -> StateGraph:
    """Discrete behaviour of ``p`` inside ``o`` up to success.

    Only action edges other than omega and full time steps are followed.
    """
    root = compose(p, o)
    require_process(root)
    return _explore(
        root, cap, sem or Semantics(), COMPOSED, keep_action=lambda l: l != OMEGA, full_only=True
    )


# -- export -------------------------------------------------------------------


def label_json(label) -> dict:
    if isinstance(label, Act):
        return {"kind": "action", "action": label.label}
    return {"kind": "time", "refusal": sorted(label.refusal), "full": label.full}


def to_json_dict(g: StateGraph) -> dict:
    return {
        "nodes": [pretty(t) for t in g.nodes],
        "initial": g.initial,
        "edges": [{"src": e.src, "label": label_json(e.label), "dst": e.dst} for e in g.edges],
        "kind": g.kind,
        "stats": g.stats(),
    }


def to_json(g: StateGraph) -> str:
    return json.dumps(to_json_dict(g), indent=2, sort_keys=False)


def _dot_escape(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(g: StateGraph, verbose_nodes: bool = False) -> str:
    lines = [f"digraph {g.kind} {{", "  rankdir=LR;"]
    for i, term in enumerate(g.nodes):
        label = _dot_escape(pretty(term)) if verbose_nodes else str(i)
        shape = "doublecircle" if i == g.initial else "circle"
        lines.append(f'  n{i} [label="{label}", shape={shape}];')
    for e in g.edges:
        style = "dashed" if e.is_time else "solid"
        lines.append(f'  n{e.src} -> n{e.dst} [label="{_dot_escape(str(e.label))}", style={style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_text(g: StateGraph) -> str:
    lines = [f"{g.kind}: {g.n} nodes, {g.e} edges, initial {g.initial}"]
    for i, term in enumerate(g.nodes):
        lines.append(f"  {i}: {pretty(term)}")
    for e in g.edges:
        lines.append(f"  {e.src} -{e.label}-> {e.dst}")
    return "\n".join(lines) + "\n"

