"""Worst-case performance analyses over reduced refusal transition systems.

* :func:`detect_catastrophic` -- a reachable cycle with time but no ``in``
  or ``out``, found through strongly connected components in O(N + E).
* :func:`asymptotic_factor` -- the average performance (full time steps per
  ``in``) of a bad cycle, found by :func:`max_ratio_cycle`.
* :func:`response_performance` -- exact ``rp(n)`` by longest-path search over
  the RRTS augmented with the user's request/response counters.
* :func:`performance` -- the general test performance ``p(P, O)`` on the
  explicit composition; it doubles as an oracle for ``rp``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from fase.errors import CapExceeded, InternalInconsistency, PreconditionError, UnbalancedCycle
from fase.graph import (
    DEFAULT_CAP,
    RRTS,
    StateGraph,
    Time,
    build_test_graph,
    make_user,
)
from fase.scc import longest_path, path_within, reachable, tarjan
from fase.semantics import Semantics
from fase.terms import IN, OUT, TAU, Term

CATASTROPHIC, BAD, UNBALANCED = "CATASTROPHIC", "BAD", "UNBALANCED"


@dataclass
class CycleWitness:
    """A closed walk ``nodes[0] -> ... -> nodes[-1] == nodes[0]``."""

    edges: list
    classification: str
    time_steps: int = 0
    ins: int = 0
    outs: int = 0

    def __post_init__(self):
        self.time_steps = sum(1 for e in self.edges if e.is_time)
        self.ins = sum(1 for e in self.edges if e.action == IN)
        self.outs = sum(1 for e in self.edges if e.action == OUT)

    @property
    def nodes(self) -> list:
        if not self.edges:
            return []
        return [self.edges[0].src] + [e.dst for e in self.edges]

    def is_closed(self) -> bool:
        if not self.edges:
            return False
        linked = all(a.dst == b.src for a, b in zip(self.edges, self.edges[1:]))
        return linked and self.edges[-1].dst == self.edges[0].src


@dataclass
class CriticalPathReport:
    n: int
    edges: list
    counters: list  # (ins, outs) before each edge
    duration: int


@dataclass
class PerfResult:
    """``value`` is an int, or ``None`` for an infinite result."""

    value: Optional[int]
    witness: Optional[CycleWitness] = None
    path: Optional[CriticalPathReport] = None
    prefix: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def infinite(self) -> bool:
        return self.value is None

    def __str__(self):
        return "infinite" if self.infinite else str(self.value)


@dataclass
class RatioResult:
    factor: Fraction
    witness: Optional[CycleWitness]
    reachability_note: bool = True
    no_cycle: bool = False
    stats: dict = field(default_factory=dict)


def _rotate(edges: list) -> list:
    """Rotate a closed walk to start at its smallest node index."""
    start = min(range(len(edges)), key=lambda k: edges[k].src)
    return edges[start:] + edges[:start]


def _steps_to_edges(steps, succ):
    return [succ[v][pos][1] for v, pos in steps]


def _require_rrts(g: StateGraph):
    if g.kind != RRTS:
        raise PreconditionError("not-rrts", f"expected an RRTS, got {g.kind}")


# -- catastrophic cycles ------------------------------------------------------


def detect_catastrophic(g: StateGraph) -> Optional[CycleWitness]:
    """A cycle of ``tau`` and time edges containing a time edge, or ``None``.

    Such a cycle exists exactly when some time edge joins two nodes of the
    same strongly connected component of the ``tau``/time subgraph. The
    witness closes the first such time edge (in edge order) with a shortest
    path back inside the component.
    """
    succ = [[] for _ in range(g.n)]
    timed = []
    for edge in g.edges:
        label = edge.label
        if type(label) is Time:
            timed.append(edge)
        elif label.label != TAU:
            continue
        succ[edge.src].append((edge.dst, edge))
    _, comp_of = tarjan(g.n, succ)
    for edge in timed:
        if comp_of[edge.src] == comp_of[edge.dst]:
            cid = comp_of[edge.src]
            back = path_within(edge.dst, edge.src, succ, lambda x: comp_of[x] == cid)
            return CycleWitness(_rotate([edge] + _steps_to_edges(back, succ)), CATASTROPHIC)
    return None


# -- maximum ratio cycles -----------------------------------------------------


def _positive_cycle(n, arcs, p, q):
    """Some cycle with positive total ``q*time - p*ins``, as arc indices."""
    dist = [0] * n
    pred = [None] * n
    weights = [q * t - p * i for _, _, t, i in arcs]
    last = None
    for _ in range(n):
        last = None
        for k, (u, v, _, _) in enumerate(arcs):
            d = dist[u] + weights[k]
            if d > dist[v]:
                dist[v] = d
                pred[v] = k
                last = v
        if last is None:
            return None, dist
    # a relaxation in round n: walking back n predecessors lands on a cycle
    v = last
    for _ in range(n):
        v = arcs[pred[v]][0]
    cycle = []
    u = v
    while True:
        k = pred[u]
        cycle.append(k)
        u = arcs[k][0]
        if u == v:
            break
    return cycle[::-1], dist


def _potentials(n, arcs, p, q):
    cycle, dist = _positive_cycle(n, arcs, p, q)
    if cycle is not None:
        raise InternalInconsistency("positive cycle left at the optimum")
    return dist


def max_ratio_cycle(n: int, arcs: list) -> Optional[tuple]:
    """Maximise ``sum(time) / sum(ins)`` over cycles with ``sum(ins) >= 1``.

    ``arcs`` is a list of ``(src, dst, time, ins)`` over nodes ``0..n-1``.
    Returns ``(ratio, arc_indices)`` with an exact :class:`Fraction` and a
    witness cycle, or ``None`` if no cycle has an ``in``.

    The ratio is found by repeated positive-cycle detection: any cycle with
    ``sum(time - ratio * ins) > 0`` improves the ratio. At the optimum the
    critical cycles are exactly the cycles of tight arcs with respect to the
    longest-path potentials; the shortest one through an ``in`` arc (then the
    lowest node index) is reported.

    Raises :class:`UnbalancedCycle` when a cycle with time but no ``in`` is
    met, since the ratio is then unbounded.
    """
    components, comp_of = tarjan(n, _succ_of(n, arcs))
    inner = [k for k, (u, v, _, _) in enumerate(arcs) if comp_of[u] == comp_of[v]]
    sub = [arcs[k] for k in inner]
    ratio = Fraction(0)
    while True:
        cycle, _ = _positive_cycle(n, sub, ratio.numerator, ratio.denominator)
        if cycle is None:
            break
        time = sum(sub[k][2] for k in cycle)
        ins = sum(sub[k][3] for k in cycle)
        if ins == 0:
            raise UnbalancedCycle(
                "cycle with time steps but no in", [inner[k] for k in cycle]
            )
        new = Fraction(time, ins)
        if new <= ratio:
            raise InternalInconsistency("ratio search did not improve")
        ratio = new

    p, q = ratio.numerator, ratio.denominator
    dist = _potentials(n, sub, p, q)
    tight = [[] for _ in range(n)]
    for k, (u, v, t, i) in enumerate(sub):
        if dist[u] + q * t - p * i == dist[v]:
            tight[u].append((v, k))
    best = None
    for k, (u, v, t, i) in enumerate(sub):
        if i == 0 or dist[u] + q * t - p * i != dist[v]:
            continue
        back = _bfs_path(v, u, tight, limit=None if best is None else best[0][0] - 1)
        if back is None:
            continue
        cycle = [k] + back
        key = (len(cycle), min(sub[j][0] for j in cycle))
        if best is None or key < best[0]:
            best = (key, cycle)
    if best is None:
        return None
    cycle = [inner[k] for k in best[1]]
    start = min(range(len(cycle)), key=lambda j: arcs[cycle[j]][0])
    return ratio, cycle[start:] + cycle[:start]


def _succ_of(n, arcs):
    succ = [[] for _ in range(n)]
    for k, (u, v, _, _) in enumerate(arcs):
        succ[u].append((v, k))
    return succ


def _bfs_path(src, dst, succ, limit=None):
    """Arc indices of a shortest path ``src -> dst`` (``[]`` if equal)."""
    if src == dst:
        return []
    parent = {src: None}
    frontier = [src]
    depth = 0
    while frontier:
        depth += 1
        if limit is not None and depth > limit:
            return None
        nxt = []
        for v in frontier:
            for w, k in succ[v]:
                if w in parent:
                    continue
                parent[w] = (v, k)
                if w == dst:
                    path = []
                    while parent[w] is not None:
                        path.append(parent[w][1])
                        w = parent[w][0]
                    return path[::-1]
                nxt.append(w)
        frontier = nxt
    return None


def full_step_arcs(g: StateGraph) -> tuple:
    """The full-step subgraph reachable from the initial node.

    Returns ``(nodes, arcs, edges)``: the reachable original node indices,
    ``(src, dst, time, ins)`` arcs over their positions, and the original
    edge of each arc.
    """
    succ = [[] for _ in range(g.n)]
    for edge in g.edges:
        if not edge.is_time or edge.label.full:
            succ[edge.src].append((edge.dst, edge))
    nodes = reachable(g.initial, succ)
    pos = {v: k for k, v in enumerate(nodes)}
    arcs, edges = [], []
    for v in nodes:
        for w, edge in succ[v]:
            arcs.append((pos[v], pos[w], int(edge.is_time), int(edge.action == IN)))
            edges.append(edge)
    return nodes, arcs, edges


def asymptotic_factor(g: StateGraph) -> RatioResult:
    """Average performance of a bad cycle of a catastrophe-free RRTS."""
    _require_rrts(g)
    catastrophic = detect_catastrophic(g)
    if catastrophic is not None:
        raise PreconditionError("catastrophic-present", "the RRTS has a catastrophic cycle", catastrophic)
    nodes, arcs, edges = full_step_arcs(g)
    try:
        found = max_ratio_cycle(len(nodes), arcs)
    except UnbalancedCycle as exc:
        exc.witness = CycleWitness([edges[k] for k in exc.witness], UNBALANCED)
        raise
    stats = {"n": g.n, "e": g.e, "sub_n": len(nodes), "sub_e": len(arcs)}
    if found is None:
        return RatioResult(Fraction(0), None, no_cycle=True, stats=stats)
    ratio, cycle = found
    return RatioResult(ratio, CycleWitness([edges[k] for k in cycle], BAD), stats=stats)


# -- response performance -----------------------------------------------------


def _time_allowed(refusal, i, o, n) -> bool:
    if i == n and o == n:
        return False
    if i < n and IN not in refusal:
        return False
    if o < i and OUT not in refusal:
        return False
    return True


def _infinite_or_longest(n_states, succ, start):
    """Shared tail of the two performance searches.

    ``succ[v]`` holds ``(w, (edge, is_time))``. Returns ``(value, cycle_steps,
    prefix_steps)`` for an infinite supremum or ``(value, path_steps, None)``.
    """
    components, comp_of = tarjan(n_states, succ)
    for v in range(n_states):
        for pos, (w, (_, is_time)) in enumerate(succ[v]):
            if is_time and comp_of[v] == comp_of[w]:
                c = comp_of[v]
                back = path_within(w, v, succ, lambda x: comp_of[x] == c)
                prefix = path_within(start, v, succ, lambda x: True)
                return None, [(v, pos)] + back, prefix
    value, steps = longest_path(start, succ, lambda wt: int(wt[1]), components, comp_of)
    return value, steps, None


def response_performance(g: StateGraph, n: int, cap: int = DEFAULT_CAP) -> PerfResult:
    """Exact ``rp(n)``: the longest n-critical path of the RRTS ``g``.

    States are ``(node, ins, outs)`` with ``outs <= ins <= n``. The user
    accepts ``in`` while requests remain and ``out`` while answers are due;
    a time step is allowed only if it refuses every action the user is
    insisting on and the user has not yet succeeded.
    """
    _require_rrts(g)
    if n < 1:
        raise ValueError("rp(n) is defined for n >= 1")
    limit = cap * (n + 1) * (n + 2) // 2
    index = {(g.initial, 0, 0): 0}
    states = [(g.initial, 0, 0)]
    succ = [[]]
    queue = deque([0])
    while queue:
        s = queue.popleft()
        v, i, o = states[s]
        out = succ[s]
        for edge in g.out_edges(v):
            label = edge.action
            if edge.is_time:
                if not _time_allowed(edge.label.refusal, i, o, n):
                    continue
                nxt = (edge.dst, i, o)
            elif label == IN:
                if i >= n:
                    continue
                nxt = (edge.dst, i + 1, o)
            elif label == OUT:
                if o >= i:
                    continue
                nxt = (edge.dst, i, o + 1)
            else:
                nxt = (edge.dst, i, o)
            t = index.get(nxt)
            if t is None:
                t = len(states)
                if t >= limit:
                    raise CapExceeded("state-cap", limit)
                index[nxt] = t
                states.append(nxt)
                succ.append([])
                queue.append(t)
            out.append((t, (edge, edge.is_time)))

    value, steps, prefix = _infinite_or_longest(len(states), succ, 0)
    stats = {"n": g.n, "e": g.e, "augmented": len(states)}
    if value is None:
        cycle = [succ[s][pos][1][0] for s, pos in steps]
        return PerfResult(
            None,
            CycleWitness(_rotate(cycle), CATASTROPHIC),
            prefix=[succ[s][pos][1][0] for s, pos in prefix],
            stats=stats,
        )
    edges = [succ[s][pos][1][0] for s, pos in steps]
    counters = [states[s][1:] for s, _ in steps]
    report = CriticalPathReport(n, edges, counters, value)
    return PerfResult(value, path=report, stats=stats)


# -- general test performance -------------------------------------------------


def performance(p: Term, o: Term, cap: int = DEFAULT_CAP, sem: Optional[Semantics] = None) -> PerfResult:
    """``p(P, O)``: the longest omega-free discrete behaviour of ``P`` in ``O``."""
    g = build_test_graph(p, o, cap, sem)
    succ = [[] for _ in range(g.n)]
    for edge in g.edges:
        succ[edge.src].append((edge.dst, (edge, edge.is_time)))
    value, steps, prefix = _infinite_or_longest(g.n, succ, g.initial)
    stats = {"n": g.n, "e": g.e}
    if value is None:
        cycle = [succ[s][pos][1][0] for s, pos in steps]
        return PerfResult(
            None,
            CycleWitness(_rotate(cycle), CATASTROPHIC),
            prefix=[succ[s][pos][1][0] for s, pos in prefix],
            stats=stats,
        )
    edges = [succ[s][pos][1][0] for s, pos in steps]
    return PerfResult(value, path=CriticalPathReport(0, edges, [], value), stats=stats)


def satisfies(p: Term, o: Term, bound: int, cap: int = DEFAULT_CAP) -> bool:
    """Whether ``P`` passes the timed test ``(O, bound)``."""
    result = performance(p, o, cap)
    return not result.infinite and result.value <= bound


def rp_oracle(p: Term, n: int, cap: int = DEFAULT_CAP) -> PerfResult:
    return performance(p, make_user(n), cap)


# -- witness replay -----------------------------------------------------------


def replay(g: StateGraph, edges: list, sem: Optional[Semantics] = None) -> bool:
    """Check each edge against the operational semantics of its source term."""
    sem = sem or Semantics()
    for edge in edges:
        src, dst = g.nodes[edge.src], g.nodes[edge.dst]
        if edge.is_time:
            step = sem.time(src)
            if step is None or step[1] != dst:
                return False
            if (not step[0]) != edge.label.full:
                return False
            if edge.label.refusal & step[0]:
                return False
        else:
            if (edge.label.label, dst) not in sem.actions(src):
                return False
    return True


__all__ = [
    "CycleWitness",
    "CriticalPathReport",
    "PerfResult",
    "RatioResult",
    "detect_catastrophic",
    "max_ratio_cycle",
    "asymptotic_factor",
    "response_performance",
    "performance",
    "satisfies",
    "rp_oracle",
    "replay",
]
