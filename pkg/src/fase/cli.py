"""Command-line front end.

Exit codes: 0 success (or no catastrophic cycle), 1 catastrophic cycle
present, 2 syntax error, 3 validation error, 4 not a response process,
5 failed precondition, 6 internal inconsistency, 7 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from fase import analysis, corpus
from fase.errors import FaseError, InternalInconsistency, ParseError, ValidationError
from fase.graph import (
    DEFAULT_CAP,
    build_rrts,
    build_rts,
    label_json,
    make_user,
    to_dot,
    to_json_dict,
    to_text,
)
from fase.semantics import discrete_traces, format_traces, refusal_traces
from fase.syntax import parse, pretty
from fase.terms import require_process, validate

EXIT_OK, EXIT_PRESENT = 0, 1


class UsageError(Exception):
    pass


def _read_term(path, inline):
    if (path is None) == (inline is None):
        raise UsageError("give exactly one of a process file or --term")
    if inline is not None:
        return parse(inline), inline
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse(text), path
    except ParseError as exc:
        raise ParseError(exc.message, exc.line, exc.column, path) from None


def _load_process(args):
    term, source = _read_term(args.file, args.term)
    require_process(term)
    return term, source


def _edge_json(e):
    return {"src": e.src, "label": label_json(e.label), "dst": e.dst}


def _witness_json(edges):
    nodes = [edges[0].src] + [e.dst for e in edges] if edges else []
    return {"nodes": nodes, "edges": [_edge_json(e) for e in edges]}


def _walk_text(edges):
    if not edges:
        return "(empty)"
    parts = [f"n{edges[0].src}"]
    for e in edges:
        parts.append(f"-{e.label}-> n{e.dst}")
    return " ".join(parts)


def _emit_json(args, name, source, result, stats, started):
    if args.timing:
        stats = {**stats, "elapsed_ms": round((time.perf_counter() - started) * 1000, 3)}
    result = {**result, "stats": stats}
    print(json.dumps({"analysis": name, "input": source, "result": result}, indent=2))


# -- commands -----------------------------------------------------------------


def cmd_check(args):
    term, source = _read_term(args.file, args.term)
    report = validate(term)
    for warning in report.warnings():
        print(f"warning: {warning}", file=sys.stderr)
    if not report.ok:
        raise ValidationError("; ".join(report.problems()))
    print("ok: closed, guarded" + (", finite-control" if report.finite_control else ""))
    return EXIT_OK


def cmd_graph(args):
    term, _ = _load_process(args)
    g = build_rrts(term, args.max_states) if args.kind == "rrts" else build_rts(term, args.max_states)
    if args.json:
        print(json.dumps(to_json_dict(g), indent=2))
    elif args.dot:
        sys.stdout.write(to_dot(g, args.verbose_nodes))
    else:
        sys.stdout.write(to_text(g))
    return EXIT_OK


def cmd_catastrophic(args):
    started = time.perf_counter()
    term, source = _load_process(args)
    g = build_rrts(term, args.max_states)
    witness = analysis.detect_catastrophic(g)
    if args.json:
        result = {"kind": "none"} if witness is None else {
            "kind": "catastrophic",
            "witness": _witness_json(witness.edges),
        }
        _emit_json(args, "catastrophic", source, result, g.stats(), started)
    elif witness is None:
        print("none")
    else:
        print("catastrophic cycle: " + _walk_text(witness.edges))
        if args.verbose:
            for v in dict.fromkeys(witness.nodes):
                print(f"  n{v}: {pretty(g.nodes[v])}")
    return EXIT_OK if witness is None else EXIT_PRESENT


def cmd_factor(args):
    started = time.perf_counter()
    term, source = _load_process(args)
    g = build_rrts(term, args.max_states)
    res = analysis.asymptotic_factor(g)
    f = res.factor
    if args.json:
        result = {"kind": "ratio", "factor": {"num": f.numerator, "den": f.denominator}}
        if res.witness is not None:
            result["witness"] = _witness_json(res.witness.edges)
        _emit_json(args, "factor", source, result, g.stats(), started)
    else:
        print(f"{f.numerator}/{f.denominator}" + (" (no cycle)" if res.no_cycle else ""))
        if res.witness is not None:
            w = res.witness
            print(f"bad cycle ({w.time_steps} time steps, {w.ins} in): " + _walk_text(w.edges))
    return EXIT_OK


def cmd_rp(args):
    started = time.perf_counter()
    term, source = _load_process(args)
    g = build_rrts(term, args.max_states)
    res = analysis.response_performance(g, args.n, args.max_states)
    if args.oracle:
        check = analysis.performance(term, make_user(args.n), args.max_states)
        if check.value != res.value:
            raise InternalInconsistency(
                f"rp({args.n}) = {res} on the RRTS but {check} on the composition"
            )
    if args.json:
        if res.infinite:
            result = {"kind": "infinite", "witness": _witness_json(res.witness.edges)}
        else:
            result = {"kind": "finite", "value": res.value, "witness": _witness_json(res.path.edges)}
        _emit_json(args, "rp", source, {**result, "n": args.n}, g.stats(), started)
    elif res.infinite:
        print("infinite")
        print("catastrophic cycle: " + _walk_text(res.witness.edges))
    else:
        print(res.value)
        print("critical path: " + _walk_text(res.path.edges))
    return EXIT_OK


def cmd_perf(args):
    started = time.perf_counter()
    if args.term is not None and args.testfile is None:
        # with an inline process the only positional is the test file
        args.file, args.testfile = None, args.file
    term, source = _load_process(args)
    test, _ = _read_term(args.testfile, args.test_term)
    require_process(test)
    res = analysis.performance(term, test, args.max_states)
    sat = None if args.bound is None else (not res.infinite and res.value <= args.bound)
    if args.json:
        if res.infinite:
            result = {"kind": "infinite", "witness": _witness_json(res.witness.edges)}
        else:
            result = {"kind": "finite", "value": res.value}
        if sat is not None:
            result["satisfied"] = sat
        _emit_json(args, "perf", source, result, res.stats, started)
    else:
        print(res)
        if sat is not None:
            print("satisfied" if sat else "not satisfied")
    return EXIT_OK


def cmd_traces(args):
    term, _ = _load_process(args)
    enumerate_ = discrete_traces if args.kind == "discrete" else refusal_traces
    traces = enumerate_(term, args.depth, cap=args.trace_cap)
    traces.discard(())
    if traces:
        print(format_traces(traces))
    return EXIT_OK


def cmd_gen(args):
    if args.family in corpus.PATHOLOGICAL:
        if args.N is not None:
            raise UsageError(f"{args.family} takes no size parameter")
        term = corpus.gen_pathological(args.family)
    else:
        if args.N is None or args.N < 1:
            raise UsageError("buffer families need N >= 1")
        term = corpus.gen_buffer(args.family, args.N)
    print(pretty(term))
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _natural(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-states", type=_positive, default=DEFAULT_CAP, metavar="K")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--timing", action="store_true", help="add elapsed_ms to JSON stats")
    common.add_argument("-v", "--verbose", action="store_true")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("file", nargs="?", help=".pafas process file")
    source.add_argument("-e", "--term", help="process given inline instead of a file")

    parser = argparse.ArgumentParser(prog="fase", description="Worst-case efficiency of timed processes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common, source], help="parse and validate")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("graph", parents=[common, source], help="print the RTS or RRTS")
    p.add_argument("--kind", choices=["rts", "rrts"], default="rts")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--verbose-nodes", action="store_true")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("catastrophic", parents=[common, source], help="look for catastrophic cycles")
    p.set_defaults(func=cmd_catastrophic)

    p = sub.add_parser("factor", parents=[common, source], help="asymptotic factor of rp")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("rp", parents=[common, source], help="response performance rp(n)")
    p.add_argument("-n", type=_positive, required=True, help="number of requests")
    p.add_argument("--oracle", action="store_true", help="cross-check on the composed system")
    p.set_defaults(func=cmd_rp)

    p = sub.add_parser("perf", parents=[common, source], help="performance p(P, O) of a test")
    p.add_argument("testfile", nargs="?", help=".pafas test process")
    p.add_argument("--test-term", help="test process given inline")
    p.add_argument("-D", dest="bound", type=_natural, help="time bound of the timed test")
    p.set_defaults(func=cmd_perf)

    p = sub.add_parser("traces", parents=[common, source], help="bounded trace listing")
    p.add_argument("--depth", type=_natural, default=3)
    p.add_argument("--kind", choices=["discrete", "refusal"], default="discrete")
    p.add_argument("--trace-cap", type=_positive, default=100_000)
    p.set_defaults(func=cmd_traces)

    p = sub.add_parser("gen", parents=[common], help="emit a corpus process")
    p.add_argument("family", choices=list(corpus.FAMILIES) + list(corpus.PATHOLOGICAL))
    p.add_argument("N", nargs="?", type=int)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except FaseError as exc:
        print(f"fase: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
