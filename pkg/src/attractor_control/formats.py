"""Text formats: ``.bn`` networks, ``.tss`` instances, and result documents.

Network grammar (one statement per line, ``#`` starts a comment)::

    document  := { statement }
    statement := "node" NAME "=" rule [ "inputs" "(" names ")" ]
               | "attractor" STATE { "," STATE }
    rule      := "TABLE" "(" [ names ] ";" BITS ")"
               | "THRESH" "(" [ weighted { "," weighted } ] ";" "tau" "=" NUMBER ")"
               | "NCF" "(" [ clause { "," clause } ] ";" "default" "=" BIT ")"
               | ("AND" | "OR") "(" names ")" | ("NOT" | "COPY") "(" NAME ")"
               | "CONST" "(" BIT ")"
               | "RULESET" "(" rule { "|" rule } ")"
    weighted  := ("+" | "-") [ NUMBER "*" ] NAME
    clause    := NAME "=" BIT "->" BIT
    names     := NAME { "," NAME }

``inputs`` lists the in-neighbours when they differ from the nodes the
rule reads. Names may be used before their ``node`` line.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import ParseError
from .network import (
    Attractor,
    NestedCanalyzing,
    RegulatoryNetwork,
    RuleSet,
    Threshold,
    TruthTable,
)
from .tss import Auxiliary, Original, TssInstance

_TOKEN = re.compile(r"\s*(?:(->)|([A-Za-z_][A-Za-z0-9_]*)|([0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?)|(.))")


@dataclass(frozen=True)
class NetworkDocument:
    net: RegulatoryNetwork
    attractor: Attractor | None = None


# ---------------------------------------------------------------------------
# tokenizer and rule parser
# ---------------------------------------------------------------------------

class _Tokens:
    def __init__(self, text, line, col0=0):
        self.items = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                break
            arrow, name, num, other = m.groups()
            start = m.start(m.lastindex)
            if other is not None and other.isspace():
                pos = m.end()
                continue
            kind = "arrow" if arrow else "name" if name else "num" if num else "sym"
            self.items.append((kind, m.group(m.lastindex), start + col0 + 1))
            pos = m.end()
        self.i = 0
        self.line = line
        self.end_col = len(text) + col0 + 1

    def error(self, msg, col=None):
        if col is None:
            col = self.items[self.i][2] if self.i < len(self.items) else self.end_col
        return ParseError(msg, self.line, col)

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else (None, None, self.end_col)

    def take(self, kind=None, value=None):
        k, v, c = self.peek()
        if k is None:
            raise self.error(f"unexpected end of line, expected {value or kind}")
        if (kind and k != kind) or (value is not None and v != value):
            raise self.error(f"expected {value or kind}, found {v!r}")
        self.i += 1
        return v, c

    def accept(self, value):
        if self.peek()[1] == value:
            self.i += 1
            return True
        return False

    def done(self):
        return self.i >= len(self.items)


def _number(text):
    return float(text) if any(c in text for c in ".eE") else int(text)


def _fmt_number(x):
    return repr(float(x)) if isinstance(x, float) else str(int(x))


class _RuleParser:
    def __init__(self, toks, index):
        self.t = toks
        self.index = index

    def node(self):
        name, col = self.t.take("name")
        if name not in self.index:
            raise self.t.error(f"undeclared node {name!r}", col)
        return self.index[name]

    def names(self, close=")"):
        out = []
        if self.t.peek()[1] in (close, ";"):
            return out
        out.append(self.node())
        while self.t.accept(","):
            out.append(self.node())
        return out

    def bit(self):
        v, col = self.t.take("num")
        if v not in ("0", "1"):
            raise self.t.error(f"expected 0 or 1, found {v!r}", col)
        return int(v)

    def rule(self):
        head, col = self.t.take("name")
        self.t.take("sym", "(")
        if head == "TABLE":
            ins = self.names()
            self.t.take("sym", ";")
            bits, bcol = self.t.take("num")
            if set(bits) - {"0", "1"} or len(bits) != 1 << len(ins):
                raise self.t.error(f"TABLE over {len(ins)} inputs needs {1 << len(ins)} bits", bcol)
            if ins != sorted(set(ins)):
                raise self.t.error("TABLE inputs must be listed in declaration order", col)
            rule = TruthTable(ins, tuple(int(b) for b in bits))
        elif head == "THRESH":
            ins, ws = [], []
            if self.t.peek()[1] != ";":
                while True:
                    sign, scol = self.t.take("sym")
                    if sign not in "+-":
                        raise self.t.error("threshold inputs start with + or -", scol)
                    w = 1
                    if self.t.peek()[0] == "num":
                        w = _number(self.t.take("num")[0])
                        self.t.take("sym", "*")
                    ins.append(self.node())
                    ws.append(w if sign == "+" else -w)
                    if not self.t.accept(","):
                        break
            self.t.take("sym", ";")
            self.t.take("name", "tau")
            self.t.take("sym", "=")
            neg = self.t.accept("-")
            tau = _number(self.t.take("num")[0])
            if len(set(ins)) != len(ins):
                raise self.t.error("THRESH lists an input twice", col)
            rule = Threshold(ins, ws, -tau if neg else tau)
        elif head == "NCF":
            order, can, out = [], [], []
            if self.t.peek()[1] != ";":
                while True:
                    order.append(self.node())
                    self.t.take("sym", "=")
                    can.append(self.bit())
                    self.t.take("arrow")
                    out.append(self.bit())
                    if not self.t.accept(","):
                        break
            self.t.take("sym", ";")
            self.t.take("name", "default")
            self.t.take("sym", "=")
            default = self.bit()
            if len(set(order)) != len(order):
                raise self.t.error("NCF lists an input twice", col)
            rule = NestedCanalyzing(order, can, out, default)
        elif head in ("AND", "OR"):
            ins = self.names()
            if not ins:
                raise self.t.error(f"{head} needs at least one input", col)
            fn = all if head == "AND" else any
            rule = TruthTable.from_function(ins, lambda bits: fn(bits))
        elif head in ("NOT", "COPY"):
            ins = self.names()
            if len(ins) != 1:
                raise self.t.error(f"{head} takes exactly one input, got {len(ins)}", col)
            rule = TruthTable(ins, (1, 0) if head == "NOT" else (0, 1))
        elif head == "CONST":
            rule = TruthTable.constant(self.bit())
        elif head == "RULESET":
            alts = [self.rule()]
            while self.t.accept("|"):
                alts.append(self.rule())
            rule = RuleSet(alts)
        else:
            raise self.t.error(f"unknown rule {head!r}", col)
        self.t.take("sym", ")")
        return rule


# ---------------------------------------------------------------------------
# networks
# ---------------------------------------------------------------------------

def _strip(line):
    return line.split("#", 1)[0].rstrip()


def parse_network_document(text: str) -> NetworkDocument:
    lines = text.splitlines()
    names = []
    decl = {}
    for ln, raw in enumerate(lines, 1):
        line = _strip(raw)
        if not line.strip():
            continue
        toks = _Tokens(line, ln)
        head = toks.peek()[1]
        if head == "node":
            toks.take()
            name, col = toks.take("name")
            if name in decl:
                raise ParseError(f"node {name!r} declared twice", ln, col)
            decl[name] = ln
            names.append(name)
        elif head != "attractor":
            raise toks.error(f"expected 'node' or 'attractor', found {head!r}")
    index = {s: i for i, s in enumerate(names)}
    rules = []
    nbrs = []
    states = None
    for ln, raw in enumerate(lines, 1):
        line = _strip(raw)
        if not line.strip():
            continue
        toks = _Tokens(line, ln)
        head = toks.take("name")[0]
        if head == "attractor":
            if states is not None:
                raise toks.error("more than one attractor line")
            states = []
            while True:
                v, col = toks.take("num")
                if set(v) - {"0", "1"} or len(v) != len(names):
                    raise ParseError(f"state must have {len(names)} bits", ln, col)
                states.append(tuple(int(c) for c in v))
                if not toks.accept(","):
                    break
        else:
            toks.take("name")
            toks.take("sym", "=")
            p = _RuleParser(toks, index)
            try:
                rule = p.rule()
            except ValueError as exc:
                if isinstance(exc, ParseError):
                    raise
                raise toks.error(str(exc)) from None
            row = None
            if toks.accept("inputs"):
                toks.take("sym", "(")
                row = p.names()
                toks.take("sym", ")")
            rules.append(rule)
            nbrs.append(row)
        if not toks.done():
            raise toks.error(f"unexpected {toks.peek()[1]!r}")
    rows = [tuple(r) if r is not None else tuple(sorted(set(rule.variables)))
            for r, rule in zip(nbrs, rules)]
    try:
        net = RegulatoryNetwork(rules, rows, names)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return NetworkDocument(net, Attractor(states) if states else None)


def parse_network(text: str) -> RegulatoryNetwork:
    return parse_network_document(text).net


def _rule_text(rule, names):
    if isinstance(rule, TruthTable):
        return f"TABLE({', '.join(names[j] for j in rule.inputs)}; {''.join(map(str, rule.table))})"
    if isinstance(rule, Threshold):
        parts = []
        for j, w in zip(rule.inputs, rule.weights):
            sign = "-" if w < 0 else "+"
            mag = -w if w < 0 else w
            parts.append(f"{sign}{names[j]}" if mag == 1 and not isinstance(mag, float)
                         else f"{sign}{_fmt_number(mag)}*{names[j]}")
        return f"THRESH({', '.join(parts)}; tau={_fmt_number(rule.tau)})"
    if isinstance(rule, NestedCanalyzing):
        parts = [f"{names[j]}={b}->{a}" for j, b, a in zip(rule.order, rule.canalyzing, rule.canalyzed)]
        return f"NCF({', '.join(parts)}; default={rule.default})"
    if isinstance(rule, RuleSet):
        return "RULESET(" + " | ".join(_rule_text(r, names) for r in rule.alternatives) + ")"
    raise TypeError(f"cannot serialize {type(rule).__name__}")


def serialize_network(net: RegulatoryNetwork, attractor=None) -> str:
    names = net.names
    out = [f"# {net.n} nodes"]
    for i, rule in enumerate(net.rules):
        line = f"node {names[i]} = {_rule_text(rule, names)}"
        if tuple(net.in_neighbors[i]) != tuple(sorted(set(rule.variables))):
            line += f" inputs({', '.join(names[j] for j in net.in_neighbors[i])})"
        out.append(line)
    if attractor is not None:
        states = attractor.states if isinstance(attractor, Attractor) else attractor
        out.append("attractor " + ", ".join("".join(map(str, s)) for s in states))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# plain Boolean rules (import shim)
# ---------------------------------------------------------------------------

_BOOL_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([01])|(.))")


def parse_boolean_rules(text: str) -> RegulatoryNetwork:
    """Networks written as ``name = expression`` lines.

    Expressions use ``and``/``&``, ``or``/``|``, ``not``/``!``/``~``,
    parentheses and the constants 0, 1, True and False. Names used but
    never defined become self-sustaining input nodes (``x = x``).
    """
    entries = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError("expected 'name = expression'", ln, 1)
        lhs, rhs = line.split("=", 1)
        name = lhs.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ParseError(f"bad node name {name!r}", ln, 1)
        entries.append((ln, name, rhs, len(lhs) + 1))
    names = []
    for ln, name, _, _ in entries:
        if name in names:
            raise ParseError(f"node {name!r} defined twice", ln, 1)
        names.append(name)
    asts = []
    for ln, name, rhs, col0 in entries:
        ast, used = _BoolParser(rhs, ln, col0).parse()
        asts.append(ast)
        for u in used:
            if u not in names:
                names.append(u)
    index = {s: i for i, s in enumerate(names)}
    rules = []
    for ast in asts:
        ins = sorted({index[u] for u in _ast_names(ast)})
        rules.append(TruthTable.from_function(
            ins, lambda bits, ast=ast, ins=ins: _ast_eval(ast, {names[j]: b for j, b in zip(ins, bits)})))
    for k in range(len(asts), len(names)):
        rules.append(TruthTable((k,), (0, 1)))
    return RegulatoryNetwork(rules, names=names)


class _BoolParser:
    def __init__(self, text, line, col0):
        self.toks = []
        for m in _BOOL_TOKEN.finditer(text):
            name, const, other = m.groups()
            if other is not None and other.isspace():
                continue
            if name in ("True", "False"):
                name, const = None, "1" if name == "True" else "0"
            if name in ("and", "or", "not"):
                name, other = None, {"and": "&", "or": "|", "not": "!"}[name]
            if other == "~":
                other = "!"
            self.toks.append((name, const, other, m.start(m.lastindex) + col0 + 1))
        self.i = 0
        self.line = line
        self.end = len(text) + col0 + 1
        self.used = []

    def error(self, msg):
        col = self.toks[self.i][3] if self.i < len(self.toks) else self.end
        return ParseError(msg, self.line, col)

    def peek(self, sym):
        return self.i < len(self.toks) and self.toks[self.i][2] == sym

    def parse(self):
        ast = self.or_()
        if self.i != len(self.toks):
            raise self.error("unexpected token")
        return ast, self.used

    def or_(self):
        parts = [self.and_()]
        while self.peek("|"):
            self.i += 1
            parts.append(self.and_())
        return ("or", parts) if len(parts) > 1 else parts[0]

    def and_(self):
        parts = [self.not_()]
        while self.peek("&"):
            self.i += 1
            parts.append(self.not_())
        return ("and", parts) if len(parts) > 1 else parts[0]

    def not_(self):
        if self.peek("!"):
            self.i += 1
            return ("not", self.not_())
        return self.atom()

    def atom(self):
        if self.i >= len(self.toks):
            raise self.error("unexpected end of expression")
        name, const, other, _ = self.toks[self.i]
        if other == "(":
            self.i += 1
            ast = self.or_()
            if not self.peek(")"):
                raise self.error("expected ')'")
            self.i += 1
            return ast
        if name is not None:
            self.i += 1
            if name not in self.used:
                self.used.append(name)
            return ("var", name)
        if const is not None:
            self.i += 1
            return ("const", int(const))
        raise self.error(f"unexpected {other!r}")


def _ast_names(ast):
    kind = ast[0]
    if kind == "var":
        return {ast[1]}
    if kind == "const":
        return set()
    if kind == "not":
        return _ast_names(ast[1])
    return set().union(*(_ast_names(a) for a in ast[1]))


def _ast_eval(ast, env):
    kind = ast[0]
    if kind == "var":
        return env[ast[1]]
    if kind == "const":
        return ast[1]
    if kind == "not":
        return 1 - _ast_eval(ast[1], env)
    vals = [_ast_eval(a, env) for a in ast[1]]
    return int(all(vals)) if kind == "and" else int(any(vals))


# ---------------------------------------------------------------------------
# TSS instances
# ---------------------------------------------------------------------------

def serialize_tss(inst: TssInstance) -> str:
    out = [f"tss {inst.m}"]
    for v in range(inst.m):
        tag = inst.provenance[v]
        if isinstance(tag, Original):
            desc = f"orig {tag.node}"
        else:
            desc = f"aux {tag.owner} {tag.clause}"
        if tag.phase:
            desc += f" phase {tag.phase}"
        out.append(f"node {v} tau={inst.tau[v]} {desc}")
    for (u, v), c in sorted(inst.edge_counts().items()):
        out.append(f"edge {u} {v}" + (f" x{c}" if c > 1 else ""))
    return "\n".join(out) + "\n"


_TSS_NODE = re.compile(r"node (\d+) tau=(-?\d+) (orig (\d+)|aux (\d+) (\d+))(?: phase (\d+))?")
_TSS_EDGE = re.compile(r"edge (\d+) (\d+)(?: x(\d+))?")


def parse_tss(text: str) -> TssInstance:
    lines = [(ln, _strip(raw).strip()) for ln, raw in enumerate(text.splitlines(), 1)]
    lines = [(ln, s) for ln, s in lines if s]
    if not lines or not re.fullmatch(r"tss \d+", lines[0][1]):
        raise ParseError("expected header 'tss <node count>'", lines[0][0] if lines else 1, 1)
    m = int(lines[0][1].split()[1])
    tau = [None] * m
    prov = [None] * m
    edges = []
    for ln, s in lines[1:]:
        if s.startswith("node"):
            g = _TSS_NODE.fullmatch(s)
            if not g:
                raise ParseError("malformed node line", ln, 1)
            v = int(g.group(1))
            if not 0 <= v < m or tau[v] is not None:
                raise ParseError(f"node {v} out of range or repeated", ln, 1)
            tau[v] = int(g.group(2))
            phase = int(g.group(7) or 0)
            if g.group(4) is not None:
                prov[v] = Original(int(g.group(4)), phase)
            else:
                prov[v] = Auxiliary(int(g.group(5)), int(g.group(6)), phase)
        elif s.startswith("edge"):
            g = _TSS_EDGE.fullmatch(s)
            if not g:
                raise ParseError("malformed edge line", ln, 1)
            u, v, c = int(g.group(1)), int(g.group(2)), int(g.group(3) or 1)
            if not (0 <= u < m and 0 <= v < m) or c < 1:
                raise ParseError(f"edge {u}->{v} out of range", ln, 1)
            edges += [(u, v)] * c
        else:
            raise ParseError("expected 'node' or 'edge'", ln, 1)
    missing = [v for v in range(m) if tau[v] is None]
    if missing:
        raise ParseError(f"nodes {missing[:5]} are not declared", lines[-1][0], 1)
    return TssInstance.from_edges(m, edges, tau, prov)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

def to_json(doc) -> str:
    """Stable JSON text for reports and result documents."""
    def default(o):
        if hasattr(o, "as_dict"):
            return o.as_dict()
        if isinstance(o, (set, frozenset)):
            return sorted(o)
        if hasattr(o, "item"):
            return o.item()
        raise TypeError(f"cannot encode {type(o).__name__}")
    return json.dumps(doc, indent=2, sort_keys=True, default=default) + "\n"

