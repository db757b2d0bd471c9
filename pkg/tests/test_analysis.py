import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fase import corpus
from fase.analysis import (
    BAD,
    CATASTROPHIC,
    asymptotic_factor,
    detect_catastrophic,
    max_ratio_cycle,
    performance,
    replay,
    response_performance,
    rp_oracle,
    satisfies,
)
from fase.errors import NotResponseProcess, PreconditionError, UnbalancedCycle
from fase.graph import RRTS, Act, Edge, StateGraph, Time, build_rrts, build_rts, make_user
from fase.syntax import parse
from fase.terms import IN, NIL, OUT, TAU
from randterms import random_arcs, random_response_process, simple_cycles

CELL = corpus.cell()


# -- helpers shared with the acceptance suite ------------------------------------


def random_labelled_graph(rng, max_nodes=8, max_edges=18):
    """A random RRTS-shaped graph with tau, in, out and time edges."""
    n = rng.randint(1, max_nodes)
    edges = []
    for _ in range(rng.randint(0, max_edges)):
        u, v = rng.randrange(n), rng.randrange(n)
        kind = rng.choice(["tau", "time", "in", "out"])
        if kind == "time":
            refusal = frozenset(x for x in (IN, OUT) if rng.random() < 0.5)
            label = Time(refusal, refusal == {IN, OUT})
        else:
            label = Act(kind)
        edges.append(Edge(u, label, v))
    edges.sort(key=lambda e: e.src)
    return StateGraph(list(range(n)), edges, RRTS, frozenset({IN, OUT}))


def brute_catastrophic(g):
    """Whether some simple tau/time cycle contains a time edge."""
    arcs = [(e.src, e.dst, int(e.is_time), 0) for e in g.edges if e.is_time or e.action == TAU]
    return any(any(arcs[k][2] for k in c) for c in simple_cycles(g.n, arcs))


def check_catastrophic_witness(g, w):
    assert w.classification == CATASTROPHIC and w.is_closed()
    assert w.time_steps >= 1 and w.ins == w.outs == 0
    assert all(e.is_time or e.action == TAU for e in w.edges)
    assert all(e in g.edges for e in w.edges)


def brute_ratio(n, arcs):
    """``None`` if unbounded, the max ratio over cycles with an ``in``, or ``"none"``."""
    best = "none"
    for c in simple_cycles(n, arcs):
        t = sum(arcs[k][2] for k in c)
        i = sum(arcs[k][3] for k in c)
        if i == 0:
            if t > 0:
                return None
            continue
        r = Fraction(t, i)
        if best == "none" or r > best:
            best = r
    return best


def check_ratio(n, arcs):
    expected = brute_ratio(n, arcs)
    if expected is None:
        with pytest.raises(UnbalancedCycle) as info:
            max_ratio_cycle(n, arcs)
        cycle = info.value.witness
        assert sum(arcs[k][2] for k in cycle) > 0 and sum(arcs[k][3] for k in cycle) == 0
        return
    found = max_ratio_cycle(n, arcs)
    if expected == "none":
        assert found is None
        return
    ratio, cycle = found
    assert ratio == expected
    assert all(arcs[a][1] == arcs[b][0] for a, b in zip(cycle, cycle[1:] + cycle[:1]))
    assert Fraction(sum(arcs[k][2] for k in cycle), sum(arcs[k][3] for k in cycle)) == ratio


# -- catastrophic cycles -------------------------------------------------------


def test_fifo_has_no_catastrophic_cycle():
    assert detect_catastrophic(build_rrts(corpus.gen_fifo(1))) is None


def test_tau_divergence_is_catastrophic():
    g = build_rrts(corpus.gen_pathological("tau_divergent"))
    w = detect_catastrophic(g)
    check_catastrophic_witness(g, w)
    assert replay(g, w.edges)


def test_urgent_deadlock_is_catastrophic():
    g = build_rrts(corpus.gen_pathological("urgent_deadlock"))
    w = detect_catastrophic(g)
    check_catastrophic_witness(g, w)


def test_single_node_without_time_edge():
    g = StateGraph([NIL], [Edge(0, Act(IN), 0)], RRTS, frozenset({IN, OUT}))
    assert detect_catastrophic(g) is None


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_detect_matches_brute_force(seed):
    g = random_labelled_graph(random.Random(seed))
    w = detect_catastrophic(g)
    assert (w is not None) == brute_catastrophic(g)
    if w is not None:
        check_catastrophic_witness(g, w)


# -- maximum ratio cycles --------------------------------------------------------


def test_single_cycle_ratio():
    ratio, cycle = max_ratio_cycle(2, [(0, 1, 1, 1), (1, 0, 1, 0)])
    assert ratio == 2 and cycle == [0, 1]


def test_disjoint_cycles_ratio():
    arcs = [(0, 1, 1, 1), (1, 0, 0, 0), (2, 3, 2, 1), (3, 2, 1, 1)]
    ratio, cycle = max_ratio_cycle(4, arcs)
    assert ratio == Fraction(3, 2) and cycle == [2, 3]


def test_ratio_tie_prefers_shorter_cycle():
    arcs = [(0, 0, 1, 1), (1, 2, 1, 1), (2, 1, 1, 1)]
    assert max_ratio_cycle(3, arcs) == (1, [0])


def test_no_cycle_with_in():
    assert max_ratio_cycle(2, [(0, 1, 1, 1)]) is None
    assert max_ratio_cycle(1, [(0, 0, 0, 0)]) is None


def test_unbalanced_cycle_detected():
    with pytest.raises(UnbalancedCycle):
        max_ratio_cycle(2, [(0, 1, 1, 0), (1, 0, 0, 0)])


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_ratio_matches_brute_force(seed):
    n, arcs = random_arcs(random.Random(seed))
    check_ratio(n, arcs)


# -- asymptotic factor -----------------------------------------------------------


@pytest.mark.parametrize("family, factor", [("fifo", 2), ("pipe", 2), ("buff", 4)])
def test_corpus_factors(family, factor):
    res = asymptotic_factor(build_rrts(corpus.gen_buffer(family, 1)))
    assert res.factor == factor
    w = res.witness
    assert w.classification == BAD and w.is_closed()
    assert Fraction(w.time_steps, w.ins) == factor
    assert all(e.label.full for e in w.edges if e.is_time)


def test_factor_with_catastrophic_cycle():
    with pytest.raises(PreconditionError) as info:
        asymptotic_factor(build_rrts(corpus.gen_pathological("tau_divergent")))
    assert info.value.kind == "catastrophic-present"


def test_factor_without_cycle():
    # the urgent internal loop at the end stops time, so nothing is catastrophic
    res = asymptotic_factor(build_rrts(parse("in.out.rec x. _tau.x")))
    assert res.no_cycle and res.factor == 0 and res.witness is None


# -- response performance --------------------------------------------------------


def rp(term, n):
    return response_performance(build_rrts(term), n)


@pytest.mark.parametrize("n, value", [(1, 2), (2, 4), (3, 6)])
def test_rp_fifo(n, value):
    assert rp(corpus.gen_fifo(1), n).value == value


def test_rp_pipe_and_buff():
    assert rp(corpus.gen_pipe(1), 2).value == 6
    assert rp(corpus.gen_buff(2), 2).value == 8


def test_rp_rejects_zero():
    with pytest.raises(ValueError):
        rp(CELL, 0)


def test_rp_needs_rrts():
    with pytest.raises(PreconditionError):
        response_performance(build_rts(CELL), 1)


def test_rp_unbalanced_input():
    with pytest.raises(NotResponseProcess):
        rp(corpus.gen_pathological("unbalanced"), 1)


def check_critical_path(g, res, n):
    report = res.path
    assert report.n == n and report.duration == res.value
    assert sum(1 for e in report.edges if e.is_time) == res.value
    assert report.edges[0].src == g.initial if report.edges else True
    assert all(a.dst == b.src for a, b in zip(report.edges, report.edges[1:]))
    for edge, (i, o) in zip(report.edges, report.counters):
        assert o <= i <= n
        if edge.is_time:
            r = edge.label.refusal
            assert not (i == n and o == n)
            assert IN in r or i == n
            assert OUT in r or o == i


@pytest.mark.parametrize("family", corpus.FAMILIES)
def test_critical_path_witness(family):
    g = build_rrts(corpus.gen_buffer(family, 1))
    for n in (1, 2, 3):
        check_critical_path(g, response_performance(g, n), n)


def test_rp_infinite_witness_replays():
    g = build_rrts(corpus.gen_pathological("tau_divergent"))
    assert response_performance(g, 1).value == 2
    res = response_performance(g, 2)
    assert res.infinite and res.witness.time_steps >= 1 and res.witness.is_closed()
    assert replay(g, res.witness.edges)
    assert replay(g, res.prefix)


def test_urgent_deadlock_rp():
    g = build_rrts(corpus.gen_pathological("urgent_deadlock"))
    res = response_performance(g, 1)
    assert res.infinite and replay(g, res.witness.edges)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_rp_monotone_and_replayable(seed):
    g = build_rrts(random_response_process(random.Random(seed)))
    previous = 0
    for n in (1, 2, 3):
        res = response_performance(g, n)
        if res.infinite:
            assert res.witness.is_closed() and res.witness.time_steps >= 1
            assert res.witness.ins == res.witness.outs == 0
            assert replay(g, res.witness.edges)
            break
        assert res.value >= previous
        check_critical_path(g, res, n)
        assert replay(g, res.path.edges)
        previous = res.value


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_rp_matches_composition_random(seed):
    p = random_response_process(random.Random(seed))
    g = build_rrts(p)
    for n in (1, 2, 3):
        assert response_performance(g, n).value == rp_oracle(p, n).value


def test_bad_cycles_balanced():
    for family in corpus.FAMILIES:
        w = asymptotic_factor(build_rrts(corpus.gen_buffer(family, 2))).witness
        assert w.ins == w.outs


# -- general tests ---------------------------------------------------------------


def test_performance_examples():
    assert performance(NIL, make_user(1)).infinite
    assert performance(CELL, make_user(1)).value == 2
    g = build_rrts(corpus.gen_fifo(1))
    for n in (1, 2, 3):
        assert performance(corpus.gen_fifo(1), make_user(n)).value == response_performance(g, n).value


def test_satisfies_examples():
    assert satisfies(CELL, make_user(1), 2)
    assert not satisfies(CELL, make_user(1), 1)
    assert not satisfies(NIL, make_user(1), 10**6)
