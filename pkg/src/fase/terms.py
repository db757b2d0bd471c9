"""Abstract syntax of timed processes.

Terms are immutable, hashable values. Structural equality is state
identity: no commutativity or associativity is applied, so ``a.nil + b.nil``
and ``b.nil + a.nil`` are different terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

TAU = "tau"
OMEGA = "omega"
IN = "in"
OUT = "out"


def _cache_hash(obj, *parts):
    object.__setattr__(obj, "_hash", hash(parts))


class Term:
    """Base class of all term nodes."""

    __slots__ = ()

    def __str__(self):
        from fase.syntax import pretty

        return pretty(self)


@dataclass(frozen=True, slots=True, eq=True)
class Nil(Term):
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cache_hash(self, "nil")

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "Nil()"


NIL = Nil()


@dataclass(frozen=True, slots=True, eq=True)
class Pre(Term):
    label: str
    urgent: bool
    body: Term
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cache_hash(self, "pre", self.label, self.urgent, self.body._hash)

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True, eq=True)
class Sum(Term):
    left: Term
    right: Term
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cache_hash(self, "sum", self.left._hash, self.right._hash)

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True, eq=True)
class SyncSet:
    """A set of visible actions used as a synchronisation alphabet.

    ``kind`` is ``finite`` (exactly ``names``), ``all`` (every visible
    action) or ``except`` (every visible action but ``names``).
    """

    kind: str
    names: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in ("finite", "all", "except"):
            raise ValueError(f"bad sync set kind {self.kind!r}")
        if TAU in self.names:
            raise ValueError("tau cannot be synchronised")
        if self.kind == "all" and self.names:
            raise ValueError("'all' sync set takes no names")

    @classmethod
    def finite(cls, names: Iterable[str] = ()) -> SyncSet:
        return cls("finite", frozenset(names))

    @classmethod
    def all(cls) -> SyncSet:
        return cls("all")

    @classmethod
    def all_except(cls, names: Iterable[str]) -> SyncSet:
        return cls("except", frozenset(names))

    def __contains__(self, name):
        if name == TAU:
            return False
        if self.kind == "finite":
            return name in self.names
        if self.kind == "all":
            return True
        return name not in self.names

    def sorted_names(self):
        return sorted(self.names)


@dataclass(frozen=True, slots=True, eq=True)
class RelabelMap:
    """A general relabelling: finitely many visible names mapped to a label.

    Mapping a name to ``tau`` hides it. Every other label is left unchanged
    and ``tau`` is always mapped to itself.
    """

    pairs: tuple = ()
    _table: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        seen = {}
        for src, dst in self.pairs:
            if src == TAU:
                raise ValueError("tau cannot be relabelled")
            if src in seen and seen[src] != dst:
                raise ValueError(f"duplicate relabelling of {src!r}")
            seen[src] = dst
        pairs = tuple(sorted((s, d) for s, d in seen.items() if s != d))
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "_table", dict(pairs))

    def __hash__(self):
        return hash(self.pairs)

    @classmethod
    def of(cls, mapping) -> RelabelMap:
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return cls(tuple(items))

    def __call__(self, label: str) -> str:
        return self._table.get(label, label)

    def hidden(self) -> frozenset:
        return frozenset(s for s, d in self.pairs if d == TAU)

    def images(self) -> frozenset:
        return frozenset(d for _, d in self.pairs if d != TAU)

    def sources(self) -> frozenset:
        return frozenset(s for s, _ in self.pairs)


@dataclass(frozen=True, slots=True, eq=True)
class Par(Term):
    left: Term
    sync: SyncSet
    right: Term
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cache_hash(self, "par", self.left._hash, self.sync, self.right._hash)

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True, eq=True)
class Relab(Term):
    body: Term
    mapping: RelabelMap
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cache_hash(self, "relab", self.body._hash, self.mapping.pairs)

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True, eq=True)
class Var(Term):
    name: str
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cache_hash(self, "var", self.name)

    def __hash__(self):
        return self._hash


@dataclass(frozen=True, slots=True, eq=True)
class Rec(Term):
    name: str
    body: Term
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        _cache_hash(self, "rec", self.name, self.body._hash)

    def __hash__(self):
        return self._hash


# -- convenience constructors -------------------------------------------------


def pre(label: str, body: Term = NIL, urgent: bool = False) -> Pre:
    return Pre(label, urgent, body)


def upre(label: str, body: Term = NIL) -> Pre:
    return Pre(label, True, body)


def seq(*labels: str, end: Term = NIL) -> Term:
    """``seq('a', '_b')`` is ``a._b.end``; a leading underscore marks urgency."""
    term = end
    for label in reversed(labels):
        urgent = label.startswith("_")
        term = Pre(label.lstrip("_"), urgent, term)
    return term


def choice(*terms: Term) -> Term:
    if not terms:
        return NIL
    result = terms[0]
    for t in terms[1:]:
        result = Sum(result, t)
    return result


def par(left: Term, names, right: Term) -> Par:
    sync = names if isinstance(names, SyncSet) else SyncSet.finite(names)
    return Par(left, sync, right)


def relab(body: Term, mapping) -> Relab:
    return Relab(body, RelabelMap.of(mapping))


# -- structural operations ----------------------------------------------------


def children(t: Term) -> tuple:
    if isinstance(t, (Nil, Var)):
        return ()
    if isinstance(t, (Pre, Relab, Rec)):
        return (t.body,)
    return (t.left, t.right)


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk over every node of ``t``."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def free_vars(t: Term) -> frozenset:
    if isinstance(t, Nil):
        return frozenset()
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Rec):
        return free_vars(t.body) - {t.name}
    result = frozenset()
    for c in children(t):
        result |= free_vars(c)
    return result


def is_closed(t: Term) -> bool:
    return not free_vars(t)


def substitute(t: Term, name: str, replacement: Term) -> Term:
    """Replace free occurrences of ``Var(name)`` in ``t`` by ``replacement``.

    ``replacement`` is expected to be closed (unfolding a recursion with its
    own closed definition), so no binder can capture anything.
    """
    memo = {}

    def go(node):
        if isinstance(node, Nil):
            return node
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            out = replacement if node.name == name else node
        elif isinstance(node, Rec):
            out = node if node.name == name else _rebuild(node, go(node.body))
        elif isinstance(node, (Pre, Relab)):
            out = _rebuild(node, go(node.body))
        else:
            out = _rebuild(node, go(node.left), go(node.right))
        memo[key] = out
        return out

    return go(t)


def _rebuild(node, *kids):
    if kids == children(node):
        return node
    if isinstance(node, Pre):
        return Pre(node.label, node.urgent, kids[0])
    if isinstance(node, Relab):
        return Relab(kids[0], node.mapping)
    if isinstance(node, Rec):
        return Rec(node.name, kids[0])
    if isinstance(node, Sum):
        return Sum(kids[0], kids[1])
    return Par(kids[0], node.sync, kids[1])


def unfold(t: Rec) -> Term:
    return substitute(t.body, t.name, t)


def sort(t: Term) -> frozenset:
    """Visible names of ``t``'s prefixes, closed under its relabellings."""
    names = set()
    maps = set()
    for node in subterms(t):
        if isinstance(node, Pre) and node.label != TAU:
            names.add(node.label)
        elif isinstance(node, Relab):
            maps.add(node.mapping)
    changed = True
    while changed:
        changed = False
        for m in maps:
            for src, dst in m.pairs:
                if src in names and dst != TAU and dst not in names:
                    names.add(dst)
                    changed = True
    return frozenset(names)


def canonical_key(t: Term) -> Term:
    """State identity of a term.

    Terms are hashable values with structural equality, so the term itself
    serves as its fingerprint.
    """
    return t


# -- well-formedness ----------------------------------------------------------


@dataclass
class ValidationReport:
    closed: bool
    guarded: bool
    finite_control: bool
    free: frozenset = frozenset()
    unguarded: tuple = ()
    non_finite_control: tuple = ()

    @property
    def ok(self) -> bool:
        """Closed and guarded: acceptable as analysis input."""
        return self.closed and self.guarded

    def problems(self) -> list:
        out = []
        if not self.closed:
            out.append("not closed: free variable(s) " + ", ".join(sorted(self.free)))
        if not self.guarded:
            out.append("not guarded: " + ", ".join(self.unguarded))
        return out

    def warnings(self) -> list:
        if self.finite_control:
            return []
        return ["not finite-control: " + ", ".join(self.non_finite_control)]


def validate(t: Term) -> ValidationReport:
    """Check closedness, guardedness and finite control."""
    unguarded = []
    nonfinite = []

    # ``binders`` maps each bound name to (guarded since binder, under par/relab)
    def go(node, binders):
        if isinstance(node, Var):
            if node.name in binders:
                guarded, dynamic = binders[node.name]
                if not guarded:
                    unguarded.append(node.name)
                if dynamic:
                    nonfinite.append(node.name)
            return
        if isinstance(node, Nil):
            return
        if isinstance(node, Pre):
            go(node.body, {k: (True, d) for k, (g, d) in binders.items()})
        elif isinstance(node, Rec):
            inner = dict(binders)
            inner[node.name] = (False, False)
            go(node.body, inner)
        elif isinstance(node, (Par, Relab)):
            inner = {k: (g, True) for k, (g, d) in binders.items()}
            for c in children(node):
                go(c, inner)
        else:
            go(node.left, binders)
            go(node.right, binders)

    go(t, {})
    free = free_vars(t)
    return ValidationReport(
        closed=not free,
        guarded=not unguarded,
        finite_control=not nonfinite,
        free=free,
        unguarded=tuple(dict.fromkeys(unguarded)),
        non_finite_control=tuple(dict.fromkeys(nonfinite)),
    )


def require_process(t: Term) -> None:
    """Raise :class:`ValidationError` unless ``t`` is closed and guarded."""
    from fase.errors import ValidationError

    report = validate(t)
    if not report.ok:
        raise ValidationError("; ".join(report.problems()))


def binder_names(t: Term) -> set:
    return {n.name for n in subterms(t) if isinstance(n, Rec)}


def all_names(t: Term) -> set:
    names = set()
    for n in subterms(t):
        if isinstance(n, (Var, Rec)):
            names.add(n.name)
        elif isinstance(n, Pre):
            names.add(n.label)
    return names
