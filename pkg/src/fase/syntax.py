"""Concrete syntax: tokenizer, recursive-descent parser and pretty printer.

Precedence from tightest to loosest: relabelling postfix ``[a->b]``,
prefix ``a.P`` (right associative), choice ``+``, parallel ``|[A]|``.
Both binary operators associate to the left. ``_a`` is an urgent prefix,
``rec x. P`` binds ``x`` in the prefix-level term ``P``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from fase.errors import ParseError
from fase.terms import (
    NIL,
    TAU,
    Nil,
    Par,
    Pre,
    Rec,
    Relab,
    RelabelMap,
    Sum,
    SyncSet,
    Term,
    Var,
    all_names,
)

RESERVED = {"nil", "rec", "tau"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<zero>0)
  | (?P<punct>[_.+()\[\],|*\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        column = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ident", "zero", "punct", "arrow"):
            value = m.group()
            tokens.append(Token(value if kind in ("punct", "arrow") else kind, value, line, column))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self):
        return self.tokens[self.pos]

    def peek(self, offset=1):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def advance(self):
        tok = self.tok
        self.pos += 1
        return tok

    def expect(self, kind, what=None):
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what or repr(kind)}, found {found!r}")
        return self.advance()

    # process := sum { sync sum }
    def process(self):
        left = self.sum()
        while self.tok.kind == "|":
            sync = self.sync_set()
            left = Par(left, sync, self.sum())
        return left

    def sync_set(self):
        self.expect("|")
        self.expect("[", "'[' after '|'")
        if self.tok.kind == "*":
            self.advance()
            if self.tok.kind == "-":
                self.advance()
                sync = SyncSet.all_except(self.names())
            else:
                sync = SyncSet.all()
        elif self.tok.kind == "]":
            sync = SyncSet.finite()
        else:
            sync = SyncSet.finite(self.names())
        self.expect("]", "']|'")
        self.expect("|", "'|' closing the synchronisation set")
        return sync

    def names(self):
        out = [self.action_name()]
        while self.tok.kind == ",":
            self.advance()
            out.append(self.action_name())
        return out

    def action_name(self, allow_tau=False):
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected an action name, found {tok.text or 'end of input'!r}")
        if tok.text in RESERVED and not (allow_tau and tok.text == TAU):
            raise self.error(f"reserved word {tok.text!r} cannot be used as an action name")
        return self.advance().text

    def sum(self):
        left = self.prefix()
        while self.tok.kind == "+":
            self.advance()
            left = Sum(left, self.prefix())
        return left

    def prefix(self):
        tok = self.tok
        if tok.kind == "_":
            self.advance()
            label = self.action_name(allow_tau=True)
            self.expect(".", "'.' after urgent action")
            return Pre(label, True, self.prefix())
        if tok.kind == "ident" and self.peek().kind == ".":
            if tok.text in ("nil", "rec"):
                raise self.error(f"reserved word {tok.text!r} cannot be used as an action name")
            self.advance()
            self.advance()
            return Pre(tok.text, False, self.prefix())
        if tok.kind == "zero" and self.peek().kind == ".":
            raise self.error("'0' cannot be used as an action name")
        return self.atom()

    def atom(self):
        tok = self.tok
        if tok.kind == "ident" and tok.text == "rec":
            self.advance()
            name = self.variable()
            self.expect(".", "'.' after recursion variable")
            return Rec(name, self.prefix())
        if tok.kind == "zero" or (tok.kind == "ident" and tok.text == "nil"):
            self.advance()
            term = NIL
        elif tok.kind == "ident":
            term = Var(self.variable())
        elif tok.kind == "(":
            self.advance()
            term = self.process()
            self.expect(")", "')'")
        else:
            raise self.error(f"expected a process, found {tok.text or 'end of input'!r}")
        while self.tok.kind == "[":
            term = Relab(term, self.renames())
        return term

    def variable(self):
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected a variable, found {tok.text or 'end of input'!r}")
        if tok.text in RESERVED:
            raise self.error(f"reserved word {tok.text!r} cannot be used as a variable")
        return self.advance().text

    def renames(self):
        self.expect("[")
        pairs = []
        if self.tok.kind != "]":
            while True:
                start = self.tok
                src = self.action_name()
                self.expect("->", "'->'")
                dst = self.action_name(allow_tau=True)
                if any(s == src and d != dst for s, d in pairs):
                    raise self.error(f"{src!r} relabelled twice", start)
                pairs.append((src, dst))
                if self.tok.kind != ",":
                    break
                self.advance()
        self.expect("]", "']' closing the relabelling")
        return RelabelMap.of(pairs)


def parse(text: str) -> Term:
    """Parse a process term; nested binders of the same name are renamed apart."""
    p = _Parser(text)
    term = p.process()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return rename_binders(term)


def rename_binders(t: Term) -> Term:
    """Alpha-rename so that nested ``rec`` binders carry distinct names."""
    used = all_names(t)

    def fresh(base):
        k = 1
        while f"{base}_{k}" in used:
            k += 1
        name = f"{base}_{k}"
        used.add(name)
        return name

    def go(node, env):
        if isinstance(node, Nil):
            return node
        if isinstance(node, Var):
            new = env.get(node.name, node.name)
            return node if new == node.name else Var(new)
        if isinstance(node, Rec):
            name = fresh(node.name) if node.name in env else node.name
            body = go(node.body, {**env, node.name: name})
            return Rec(name, body)
        if isinstance(node, Pre):
            return Pre(node.label, node.urgent, go(node.body, env))
        if isinstance(node, Relab):
            return Relab(go(node.body, env), node.mapping)
        if isinstance(node, Sum):
            return Sum(go(node.left, env), go(node.right, env))
        return Par(go(node.left, env), node.sync, go(node.right, env))

    return go(t, {})


# -- pretty printing ----------------------------------------------------------

_PAR, _SUM, _PREFIX, _ATOM = range(4)


def format_sync(sync: SyncSet) -> str:
    if sync.kind == "all":
        return "|[*]|"
    names = ",".join(sync.sorted_names())
    if sync.kind == "except":
        return f"|[*-{names}]|"
    return f"|[{names}]|"


def format_relabel(mapping: RelabelMap) -> str:
    return "[" + ", ".join(f"{s}->{d}" for s, d in mapping.pairs) + "]"


def pretty(t: Term) -> str:
    """Render ``t`` in the surface syntax; ``parse(pretty(t)) == t``."""
    return _pp(t, _PAR)


def _pp(t, ctx):
    if isinstance(t, Nil):
        return "nil"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Pre):
        s = ("_" if t.urgent else "") + t.label + "." + _pp(t.body, _PREFIX)
        level = _PREFIX
    elif isinstance(t, Rec):
        s = f"rec {t.name}. " + _pp(t.body, _PREFIX)
        level = _PREFIX
    elif isinstance(t, Sum):
        s = _pp(t.left, _SUM) + " + " + _pp(t.right, _PREFIX)
        level = _SUM
    elif isinstance(t, Par):
        s = _pp(t.left, _PAR) + " " + format_sync(t.sync) + " " + _pp(t.right, _SUM)
        level = _PAR
    else:
        return _pp(t.body, _ATOM) + format_relabel(t.mapping)
    return f"({s})" if ctx > level else s
