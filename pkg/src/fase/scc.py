"""Strongly connected components and longest paths over condensations.

Graphs are given as adjacency lists ``succ[v] = [(w, weight), ...]`` over
nodes ``0..n-1``. Everything here is iterative: state graphs are far deeper
than Python's recursion limit.
"""

from __future__ import annotations

from collections import deque


def tarjan(n: int, succ) -> tuple:
    """Return ``(components, comp_of)``.

    Components are lists of nodes, emitted in reverse topological order of
    the condensation (every edge leaving a component points to one emitted
    earlier). Runs in O(n + e).
    """
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp_of = [-1] * n
    stack = []
    components = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            edges = succ[v]
            if i < len(edges):
                work[-1] = (v, i + 1)
                w = edges[i][0]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                cid = len(components)
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp_of[w] = cid
                    comp.append(w)
                    if w == v:
                        break
                components.append(comp)
    return components, comp_of


def reachable(start, succ) -> list:
    """Nodes reachable from ``start`` in breadth-first order."""
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w, _ in succ[v]:
            if w not in seen:
                seen.add(w)
                order.append(w)
                queue.append(w)
    return order


def path_within(src, dst, succ, allowed) -> list:
    """Shortest edge path ``src -> dst`` through nodes satisfying ``allowed``.

    Returns the list of ``(v, edge_position)`` steps; empty when
    ``src == dst``. Ties go to the lowest edge position.
    """
    if src == dst:
        return []
    parent = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for pos, (w, _) in enumerate(succ[v]):
            if w in parent or not allowed(w):
                continue
            parent[w] = (v, pos)
            if w == dst:
                steps = []
                while parent[w] is not None:
                    steps.append(parent[w])
                    w = parent[w][0]
                return steps[::-1]
            queue.append(w)
    raise ValueError(f"{dst} not reachable from {src}")


def longest_path(start, succ, weight, components, comp_of) -> tuple:
    """Longest ``weight``-path from ``start`` in a graph whose components
    carry no positive-weight edge internally.

    ``weight(w)`` maps an edge weight entry to a number. Returns
    ``(value, steps)`` with ``steps`` a witness list of ``(v, edge_position)``.
    Components must come from :func:`tarjan` on the same ``succ``.
    """
    best = {}
    choice = {}
    for comp in components:
        # inside a component all connecting edges weigh 0; the best exit of
        # the component is shared by all of its nodes
        exit_value, exit_from = 0, None
        for v in comp:
            for pos, (w, wt) in enumerate(succ[v]):
                if comp_of[w] == comp_of[v]:
                    continue
                val = weight(wt) + best[w]
                if val > exit_value:
                    exit_value, exit_from = val, (v, pos)
        for v in comp:
            best[v] = exit_value
            choice[v] = exit_from
    steps = []
    v = start
    while choice.get(v) is not None:
        u, pos = choice[v]
        steps.extend(path_within(v, u, succ, lambda x, c=comp_of[v]: comp_of[x] == c))
        steps.append((u, pos))
        v = succ[u][pos][0]
    return best[start], steps
