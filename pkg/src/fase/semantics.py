"""Structural operational semantics.

Action steps follow the usual CCS/CSP rules. Time steps are computed in a
single pass that returns the unique aged target together with the set of
visible actions the term *cannot* refuse (its ``blocked`` set). The maximal
refusal set relative to a finite universe is the complement of that set, and
every subset of it is a valid conditional time step to the same target.

Rules for the blocked set ``B``:

* ``nil`` and lazy prefixes block nothing; ``_a.P`` blocks ``a``;
  ``_tau.P`` has no time step at all.
* ``P + Q`` needs both steps and blocks ``B1 | B2``.
* ``P |[A]| Q`` needs both steps; a synchronised action is blocked only if
  both sides block it, any other action if either side does.
* ``P[f]`` needs ``P`` to refuse every action hidden by ``f``; it blocks the
  images of ``B``.
* ``rec x. P`` behaves as its unfolding.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional

from fase.errors import CapExceeded, UnfoldingError
from fase.terms import TAU, Nil, Par, Pre, Rec, Relab, Sum, Term, Var, sort, unfold

TICK = "1"
MAX_UNFOLD = 64


@dataclass(frozen=True)
class ActionStep:
    label: str
    target: Term


@dataclass(frozen=True)
class TimeStep:
    """The unique time step of a term.

    ``refusal`` is the maximal refusal set relative to ``universe`` (the root
    sort unless given otherwise); ``blocked`` is what the term cannot refuse.
    """

    refusal: frozenset
    blocked: frozenset
    target: Term

    @property
    def full(self) -> bool:
        return not self.blocked


class Semantics:
    """Memoising evaluator for action and time steps.

    One instance per analysis session; the caches are not shared between
    threads.
    """

    def __init__(self):
        self._actions = {}
        self._time = {}
        self._unfold = {}
        self._depth = 0

    @contextmanager
    def _entering(self, t):
        self._depth += 1
        try:
            if self._depth > MAX_UNFOLD:
                raise UnfoldingError(f"unguarded recursion: {t}")
            yield
        finally:
            self._depth -= 1

    def unfold(self, t: Rec) -> Term:
        """Unfold ``t`` until its top is no longer a recursion."""
        out = self._unfold.get(t)
        if out is None:
            out = t
            for _ in range(MAX_UNFOLD):
                out = unfold(out)
                if not isinstance(out, Rec):
                    break
            else:
                raise UnfoldingError(f"recursion does not reach a prefix: {t}")
            self._unfold[t] = out
        return out

    def actions(self, t: Term) -> tuple:
        """All ``(label, target)`` pairs, duplicates removed, in rule order."""
        out = self._actions.get(t)
        if out is None:
            out = tuple(dict.fromkeys(self._derive_actions(t)))
            self._actions[t] = out
        return out

    def _derive_actions(self, t):
        if isinstance(t, Pre):
            yield t.label, t.body
        elif isinstance(t, Sum):
            yield from self.actions(t.left)
            yield from self.actions(t.right)
        elif isinstance(t, Par):
            sync = t.sync
            left, right = self.actions(t.left), self.actions(t.right)
            for label, target in left:
                if label not in sync:
                    yield label, Par(target, sync, t.right)
            for label, target in right:
                if label not in sync:
                    yield label, Par(t.left, sync, target)
            for label, ltarget in left:
                if label in sync:
                    for rlabel, rtarget in right:
                        if rlabel == label:
                            yield label, Par(ltarget, sync, rtarget)
        elif isinstance(t, Relab):
            f = t.mapping
            for label, target in self.actions(t.body):
                yield f(label), Relab(target, f)
        elif isinstance(t, Rec):
            with self._entering(t):
                yield from self.actions(self.unfold(t))
        elif isinstance(t, Var):
            raise UnfoldingError(f"free variable {t.name!r} reached")

    def time(self, t: Term) -> Optional[tuple]:
        """``(blocked, target)`` of the time step of ``t``, or ``None``."""
        try:
            return self._time[t]
        except KeyError:
            pass
        out = self._derive_time(t)
        self._time[t] = out
        return out

    def _derive_time(self, t):
        if isinstance(t, Nil):
            return frozenset(), t
        if isinstance(t, Pre):
            if not t.urgent:
                return frozenset(), Pre(t.label, True, t.body)
            if t.label == TAU:
                return None
            return frozenset([t.label]), t
        if isinstance(t, Sum):
            left = self.time(t.left)
            if left is None:
                return None
            right = self.time(t.right)
            if right is None:
                return None
            return left[0] | right[0], Sum(left[1], right[1])
        if isinstance(t, Par):
            left = self.time(t.left)
            if left is None:
                return None
            right = self.time(t.right)
            if right is None:
                return None
            bl, br = left[0], right[0]
            sync = t.sync
            blocked = frozenset(x for x in bl | br if (x in bl and x in br) or x not in sync)
            return blocked, Par(left[1], sync, right[1])
        if isinstance(t, Relab):
            inner = self.time(t.body)
            if inner is None:
                return None
            f = t.mapping
            images = frozenset(f(x) for x in inner[0])
            if TAU in images:
                return None
            return images, Relab(inner[1], f)
        if isinstance(t, Rec):
            with self._entering(t):
                return self.time(self.unfold(t))
        raise UnfoldingError(f"free variable {t.name!r} reached")

    def time_step(self, t: Term, universe=None) -> Optional[TimeStep]:
        res = self.time(t)
        if res is None:
            return None
        blocked, target = res
        universe = sort(t) if universe is None else frozenset(universe)
        return TimeStep(universe - blocked, blocked, target)


def action_successors(t: Term, sem: Optional[Semantics] = None) -> list:
    sem = sem or Semantics()
    return [ActionStep(label, target) for label, target in sem.actions(t)]


def time_step(t: Term, universe=None, sem: Optional[Semantics] = None) -> Optional[TimeStep]:
    return (sem or Semantics()).time_step(t, universe)


def refuses(t: Term, refused, sem: Optional[Semantics] = None) -> bool:
    """Whether ``t`` can make a time step refusing every action in ``refused``."""
    res = (sem or Semantics()).time(t)
    return res is not None and not (res[0] & frozenset(refused))


def is_full(ts: TimeStep, universe=None) -> bool:
    if universe is None:
        return ts.full
    return ts.refusal >= frozenset(universe)


def _traces(t, depth, discrete, cap, sem):
    sem = sem or Semantics()
    universe = sort(t)
    result = {()}
    frontier = {((), t)}
    for _ in range(depth):
        nxt = set()
        for trace, state in frontier:
            for label, target in sem.actions(state):
                nxt.add((trace + (label,), target))
            res = sem.time(state)
            if res is not None:
                blocked, target = res
                if discrete:
                    if not blocked:
                        nxt.add((trace + (TICK,), target))
                else:
                    nxt.add((trace + (universe - blocked,), target))
        for trace, _ in nxt:
            result.add(trace)
        if len(result) > cap:
            raise CapExceeded("trace-cap", cap)
        frontier = nxt
    return result


def refusal_traces(t: Term, depth: int, cap: int = 100_000, sem=None) -> set:
    """Refusal traces of length at most ``depth``.

    Time items are the maximal refusal sets (frozensets over the sort of
    ``t``); the full refusal trace language is their per-step downward
    closure.
    """
    return _traces(t, depth, False, cap, sem)


def discrete_traces(t: Term, depth: int, cap: int = 100_000, sem=None) -> set:
    """Discrete traces of length at most ``depth``; full time steps are ``"1"``."""
    return _traces(t, depth, True, cap, sem)


def format_item(item) -> str:
    if isinstance(item, frozenset):
        return "{" + ",".join(sorted(item)) + "}"
    return item


def format_traces(traces) -> str:
    """One trace per line, items comma separated, sorted by length then text."""
    keyed = sorted((len(tr), ", ".join(format_item(i) for i in tr)) for tr in traces)
    return "\n".join(line if line else "ε" for _, line in keyed)
