"""Direct relational reading of the conditional time-step rules.

``targets(t, X, U)`` is the set of ``u`` with ``t --X--> u`` where ``X`` and
the universe ``U`` are explicit sets of visible names. Parallel composition
searches all component refusal sets instead of using any maximal-set
shortcut, so this checker is independent of :mod:`fase.semantics`.
"""

from functools import lru_cache
from itertools import chain, combinations

from fase.terms import TAU, Nil, Par, Pre, Rec, Relab, Sum, unfold


def subsets(universe):
    items = sorted(universe)
    return [frozenset(c) for c in chain.from_iterable(combinations(items, k) for k in range(len(items) + 1))]


def targets(t, refused, universe):
    return _targets(t, frozenset(refused), frozenset(universe))


@lru_cache(maxsize=None)
def _targets(t, X, U):
    if isinstance(t, Nil):
        return frozenset([t])
    if isinstance(t, Pre):
        if not t.urgent:
            return frozenset([Pre(t.label, True, t.body)])
        if t.label == TAU or t.label in X:
            return frozenset()
        return frozenset([t])
    if isinstance(t, Sum):
        left = _targets(t.left, X, U)
        right = _targets(t.right, X, U)
        return frozenset(Sum(a, b) for a in left for b in right)
    if isinstance(t, Par):
        A = t.sync
        out = set()
        for X1 in subsets(U):
            lefts = _targets(t.left, X1, U)
            if not lefts:
                continue
            for X2 in subsets(U):
                allowed = {x for x in X1 | X2 if x in A} | {x for x in X1 & X2 if x not in A}
                if not X <= allowed:
                    continue
                for b in _targets(t.right, X2, U):
                    for a in lefts:
                        out.add(Par(a, A, b))
        return frozenset(out)
    if isinstance(t, Relab):
        f = t.mapping
        pre_image = frozenset(y for y in U if f(y) in X or f(y) == TAU)
        return frozenset(Relab(u, f) for u in _targets(t.body, pre_image, U))
    if isinstance(t, Rec):
        return _targets(unfold(t), X, U)
    raise ValueError(f"open term {t!r}")
