"""Bounded buffers of capacity ``N + 2`` and a few pathological processes.

All generators build terms directly; nested ``rec`` binders always carry
distinct names so that printing and re-parsing gives back the same term.
"""

from __future__ import annotations

from fase.terms import (
    IN,
    OUT,
    TAU,
    Par,
    Pre,
    Rec,
    Relab,
    RelabelMap,
    SyncSet,
    Term,
    Var,
    choice,
    seq,
)

FAMILIES = ("fifo", "pipe", "buff")
PATHOLOGICAL = ("tau_divergent", "urgent_deadlock", "unbalanced")


def _check(n):
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"buffer parameter N must be a positive integer, got {n!r}")


def gen_fifo(n: int) -> Term:
    """Sequential counter ``B_0 .. B_c`` with ``c = N + 2``, no internal actions.

    ``B_0 = in.B_1``, ``B_j = in.B_{j+1} + out.B_{j-1}``, ``B_c = out.B_{c-1}``,
    encoded by nesting: ``B_j`` is bound inside the body of ``B_{j-1}``.
    """
    _check(n)
    c = n + 2
    term = Rec(f"B{c}", Pre(OUT, False, Var(f"B{c - 1}")))
    for j in range(c - 1, 0, -1):
        term = Rec(f"B{j}", choice(Pre(IN, False, term), Pre(OUT, False, Var(f"B{j - 1}"))))
    return Rec("B0", Pre(IN, False, term))


def cell(name: str = "x") -> Term:
    """A one-place buffer ``rec x. in.out.x``."""
    return Rec(name, seq(IN, OUT, end=Var(name)))


def gen_pipe(n: int) -> Term:
    """``N + 2`` cells chained end to end through hidden links.

    Cell ``k``'s ``out`` and cell ``k+1``'s ``in`` are both renamed to
    ``link<k>`` and synchronised; all links are hidden at the top.
    """
    _check(n)
    cells = n + 2
    links = [f"link{k}" for k in range(1, cells)]
    term = Relab(cell(), RelabelMap.of({OUT: links[0]}))
    for k in range(1, cells):
        mapping = {IN: links[k - 1]}
        if k < cells - 1:
            mapping[OUT] = links[k]
        term = Par(term, SyncSet.finite([links[k - 1]]), Relab(cell(), RelabelMap.of(mapping)))
    return Relab(term, RelabelMap.of({link: TAU for link in links}))


def _cycle(name, labels):
    return Rec(name, seq(*labels, end=Var(name)))


def _controller_core(n: int) -> Term:
    """The sequential heart of the controller.

    Its state is (input register full?, latch full?). ``in`` fills the input
    register, ``w<i>`` moves it into a storage slot, ``r<i>`` refills the
    latch from a slot, ``out`` empties the latch. Which slot is written or
    read is decided by the pointer processes it synchronises with.
    """
    writes = [f"w{i}" for i in range(n)]
    reads = [f"r{i}" for i in range(n)]

    def state(x, h, env):
        name = f"C{x}{h}"
        if name in env:
            return Var(name)
        env = env | {name}
        branches = []
        if not x:
            branches.append(Pre(IN, False, state(1, h, env)))
        if x:
            branches += [Pre(w, False, state(0, h, env)) for w in writes]
        if not h:
            branches += [Pre(r, False, state(x, 1, env)) for r in reads]
        if h:
            branches.append(Pre(OUT, False, state(x, 0, env)))
        return Rec(name, choice(*branches))

    return state(0, 0, frozenset())


def gen_buff(n: int) -> Term:
    """Controller managing ``N`` storage cells circularly, plus a latch.

    ``MEM`` interleaves slots ``S_i = rec. w_i.r_i.S_i``. The controller is
    its sequential core together with a write pointer and a read pointer
    cycling through the slots in order, so writes and reads follow the
    circular discipline. The core holds one value on input and one in the
    latch, giving capacity ``N + 2``. All ``w_i``/``r_i`` are hidden.
    """
    _check(n)
    writes = [f"w{i}" for i in range(n)]
    reads = [f"r{i}" for i in range(n)]
    wp = _cycle("WP", writes)
    rp = _cycle("RP", reads)
    pointers = Par(wp, SyncSet.finite([]), rp)
    controller = Par(_controller_core(n), SyncSet.finite(writes + reads), pointers)
    mem = _cycle("S0", [writes[0], reads[0]])
    for i in range(1, n):
        mem = Par(mem, SyncSet.finite([]), _cycle(f"S{i}", [writes[i], reads[i]]))
    system = Par(controller, SyncSet.finite(writes + reads), mem)
    return Relab(system, RelabelMap.of({a: TAU for a in writes + reads}))


def gen_buffer(family: str, n: int) -> Term:
    try:
        gen = {"fifo": gen_fifo, "pipe": gen_pipe, "buff": gen_buff}[family]
    except KeyError:
        raise ValueError(f"unknown buffer family {family!r}") from None
    return gen(n)


def gen_pathological(name: str) -> Term:
    """Small regression processes.

    ``tau_divergent`` answers one request, then loops on a hidden action
    while time passes. ``urgent_deadlock`` takes a request and then insists
    on a second ``in`` that a user with one request refuses, so time passes
    forever with an answer due. ``unbalanced`` answers before any request.
    """
    if name == "tau_divergent":
        loop = Relab(Rec("x", Pre("a", False, Var("x"))), RelabelMap.of({"a": TAU}))
        return seq(IN, OUT, end=loop)
    if name == "urgent_deadlock":
        return seq(IN, "_" + IN)
    if name == "unbalanced":
        return seq(OUT, IN)
    raise ValueError(f"unknown pathological process {name!r}")


__all__ = [
    "FAMILIES",
    "PATHOLOGICAL",
    "cell",
    "gen_fifo",
    "gen_pipe",
    "gen_buff",
    "gen_buffer",
    "gen_pathological",
]
