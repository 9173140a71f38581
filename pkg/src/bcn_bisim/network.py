"""Textual network descriptions: parse, compile rules to structure matrices, assemble F.

Format (one statement per line, ``#`` starts a comment)::

    state X1 X2 X3
    input U1 U2
    X1' = U1 & !X2
    X2' = X1 -> (X3 <-> U2)
    X3' = 1
    target = {1, 3:5}          # delta indices, ranges inclusive
    target = X1 & !X3          # or a predicate over state variables

A probabilistic network groups its rules into ``mode p=<rational>:`` blocks,
each holding exactly one rule per state variable.

State delta_N^i encodes the bits with i = 1 + sum_k (1 - X_k) 2^(n-k), so the
all-true state is delta_N^1.  The combined variable vector is u(x)x with inputs
first, which makes F input-major.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Optional, Sequence, Union

import numpy as np

from .matrix import LogicalMatrix, khatri_rao
from .model import BcnModel, PbcnModel, TargetSet


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        super().__init__(f"{line}:{col}: {message}" if line else message)


# --------------------------------------------------------------------------
# expression AST

# precedence, higher binds tighter
_PREC = {"<->": 1, "->": 2, "|": 3, "&": 4}
_RIGHT_ASSOC = {"->"}


@dataclass(frozen=True)
class Const:
    value: bool

    def evaluate(self, env, size):
        return np.full(size, self.value, dtype=bool)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def evaluate(self, env, size):
        return env[self.name]


@dataclass(frozen=True)
class Not:
    operand: "Expr"

    def evaluate(self, env, size):
        return ~self.operand.evaluate(env, size)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"

    def evaluate(self, env, size):
        a, b = self.left.evaluate(env, size), self.right.evaluate(env, size)
        if self.op == "&":
            return a & b
        if self.op == "|":
            return a | b
        if self.op == "->":
            return ~a | b
        return a == b


Expr = Union[Const, Var, Not, Binary]


def variables(expr: Expr) -> list[Var]:
    if isinstance(expr, Var):
        return [expr]
    if isinstance(expr, Not):
        return variables(expr.operand)
    if isinstance(expr, Binary):
        return variables(expr.left) + variables(expr.right)
    return []


def format_expr(expr: Expr) -> str:
    """Canonical text with the minimum parentheses needed to re-parse to the same tree."""
    if isinstance(expr, Const):
        return "1" if expr.value else "0"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Not):
        inner = format_expr(expr.operand)
        return f"!{inner}" if isinstance(expr.operand, (Const, Var, Not)) else f"!({inner})"
    prec = _PREC[expr.op]

    def side(child, is_left):
        text = format_expr(child)
        if isinstance(child, Binary):
            cp = _PREC[child.op]
            right_assoc = expr.op in _RIGHT_ASSOC
            if cp < prec or (cp == prec and (is_left == right_assoc)):
                return f"({text})"
        return text

    return f"{side(expr.left, True)} {expr.op} {side(expr.right, False)}"


# --------------------------------------------------------------------------
# source structure


@dataclass
class Mode:
    probability: Fraction
    rules: dict[str, Expr]
    line: int = 0


@dataclass
class NetworkSource:
    state_vars: tuple[str, ...]
    input_vars: tuple[str, ...]
    rules: dict[str, Expr]
    modes: list[Mode] = field(default_factory=list)
    target: Optional[Union[tuple[int, ...], Expr]] = None

    @property
    def probabilistic(self) -> bool:
        return bool(self.modes)


def format_source(src: NetworkSource) -> str:
    lines = [f"state {' '.join(src.state_vars)}"]
    if src.input_vars:
        lines.append(f"input {' '.join(src.input_vars)}")

    def rule_lines(rules, indent=""):
        return [f"{indent}{v}' = {format_expr(rules[v])}" for v in src.state_vars]

    if src.modes:
        for mode in src.modes:
            lines.append(f"mode p={mode.probability}:")
            lines.extend(rule_lines(mode.rules, "  "))
    else:
        lines.extend(rule_lines(src.rules))
    if isinstance(src.target, tuple):
        lines.append(f"target = {{{', '.join(map(str, src.target))}}}")
    elif src.target is not None:
        lines.append(f"target = {format_expr(src.target)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<arrow2><->)
  | (?P<arrow>->)
  | (?P<rational>\d+(?:/\d+|\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[!&|()=':,{}])
""", re.X)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, lineno: int) -> list[_Tok]:
    toks, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            toks.append(_Tok(value if kind in ("punct", "arrow", "arrow2") else kind, value, lineno, pos + 1))
        pos = m.end()
    return toks


class _Line:
    def __init__(self, toks: list[_Tok], lineno: int, length: int):
        self.toks, self.i, self.lineno, self.length = toks, 0, lineno, length

    def peek(self, offset=0) -> Optional[_Tok]:
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def take(self, kind: Optional[str] = None) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of line, expected {kind or 'token'}", self.lineno, self.length + 1)
        if kind is not None and tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text!r}", tok.line, tok.col)
        self.i += 1
        return tok

    def done(self):
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)

    # expr := iff ; iff := imp ('<->' imp)* ; imp := or ('->' imp)? ; or := and ('|' and)* ;
    # and := unary ('&' unary)* ; unary := '!' unary | atom
    def expr(self) -> Expr:
        node = self._imp()
        while self.peek() is not None and self.peek().kind == "<->":
            self.take()
            node = Binary("<->", node, self._imp())
        return node

    def _imp(self) -> Expr:
        node = self._or()
        if self.peek() is not None and self.peek().kind == "->":
            self.take()
            node = Binary("->", node, self._imp())
        return node

    def _or(self) -> Expr:
        node = self._and()
        while self.peek() is not None and self.peek().kind == "|":
            self.take()
            node = Binary("|", node, self._and())
        return node

    def _and(self) -> Expr:
        node = self._unary()
        while self.peek() is not None and self.peek().kind == "&":
            self.take()
            node = Binary("&", node, self._unary())
        return node

    def _unary(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok.kind == "!":
            self.take()
            return Not(self._unary())
        return self._atom()

    def _atom(self) -> Expr:
        tok = self.take()
        if tok.kind == "(":
            node = self.expr()
            self.take(")")
            return node
        if tok.kind == "name":
            return Var(tok.text, tok.line, tok.col)
        if tok.kind == "rational" and tok.text in ("0", "1"):
            return Const(tok.text == "1")
        raise ParseError(f"expected expression, found {tok.text!r}", tok.line, tok.col)


def _parse_index_set(ln: _Line) -> tuple[int, ...]:
    ln.take("{")
    members: list[int] = []
    while True:
        tok = ln.take("rational")
        lo = _int_token(tok)
        if ln.peek() is not None and ln.peek().kind == ":":
            ln.take()
            hi_tok = ln.take("rational")
            hi = _int_token(hi_tok)
            if hi < lo:
                raise ParseError(f"empty range {lo}:{hi}", hi_tok.line, hi_tok.col)
            members.extend(range(lo, hi + 1))
        else:
            members.append(lo)
        if ln.peek() is not None and ln.peek().kind == ",":
            ln.take()
            continue
        ln.take("}")
        return tuple(sorted(set(members)))


def _int_token(tok: _Tok) -> int:
    if not tok.text.isdigit():
        raise ParseError(f"expected an integer, found {tok.text!r}", tok.line, tok.col)
    return int(tok.text)


def parse(text: str) -> NetworkSource:
    """Parse ``.bcn`` text; raises :class:`ParseError` with 1-based line/column."""
    state_vars: list[str] = []
    input_vars: list[str] = []
    base_rules: dict[str, Expr] = {}
    modes: list[Mode] = []
    target = None
    target_pos = (0, 0)
    rule_pos: dict[int, dict[str, tuple[int, int]]] = {}
    declared: dict[str, str] = {}
    state_line = 0

    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        toks = _tokenize(body, lineno)
        if not toks:
            continue
        ln = _Line(toks, lineno, len(body.rstrip()))
        head = ln.peek()
        nxt = ln.peek(1)
        if head.kind == "name" and head.text in ("state", "input") and (nxt is None or nxt.kind == "name"):
            ln.take()
            names = []
            while ln.peek() is not None:
                tok = ln.take("name")
                if tok.text in declared:
                    raise ParseError(f"variable {tok.text!r} declared twice", tok.line, tok.col)
                declared[tok.text] = head.text
                names.append(tok.text)
                if ln.peek() is not None and ln.peek().kind == ",":
                    ln.take()
            if not names:
                raise ParseError(f"'{head.text}' needs at least one variable", head.line, head.col)
            (state_vars if head.text == "state" else input_vars).extend(names)
            state_line = state_line or (lineno if head.text == "state" else 0)
        elif head.kind == "name" and head.text == "mode" and (nxt is None or nxt.kind != "'"):
            ln.take()
            key = ln.take("name")
            if key.text != "p":
                raise ParseError("expected 'p=' in mode header", key.line, key.col)
            ln.take("=")
            ptok = ln.take("rational")
            ln.take(":")
            ln.done()
            modes.append(Mode(Fraction(ptok.text), {}, lineno))
            if Fraction(ptok.text) <= 0:
                raise ParseError("mode probability must be positive", ptok.line, ptok.col)
        elif head.kind == "name" and head.text == "target" and nxt is not None and nxt.kind == "=":
            if target is not None:
                raise ParseError("target given twice", head.line, head.col)
            ln.take()
            ln.take("=")
            target_pos = (head.line, head.col)
            target = _parse_index_set(ln) if ln.peek() is not None and ln.peek().kind == "{" else ln.expr()
            ln.done()
        elif head.kind == "name" and nxt is not None and nxt.kind == "'":
            ln.take()
            ln.take("'")
            ln.take("=")
            expr = ln.expr()
            ln.done()
            bucket = modes[-1].rules if modes else base_rules
            where = rule_pos.setdefault(len(modes), {})
            if head.text in bucket:
                raise ParseError(f"duplicate rule for {head.text!r}", head.line, head.col)
            bucket[head.text] = expr
            where[head.text] = (head.line, head.col)
        else:
            raise ParseError(f"unrecognised statement starting with {head.text!r}", head.line, head.col)

    if not state_vars:
        raise ParseError("no state variables declared (missing 'state' line)", 1, 1)
    if base_rules and modes:
        line0, col0 = next(iter(rule_pos[0].values()))
        raise ParseError("rules outside a mode block are not allowed in a probabilistic network", line0, col0)

    rule_sets = [(0, base_rules)] if not modes else [(k + 1, md.rules) for k, md in enumerate(modes)]
    for key, rules in rule_sets:
        for name, (line, col) in rule_pos.get(key, {}).items():
            if declared.get(name) != "state":
                raise ParseError(f"rule target {name!r} is not a declared state variable", line, col)
        for var in state_vars:
            if var not in rules:
                line = modes[key - 1].line if modes else state_line
                raise ParseError(f"missing rule for state variable {var!r}", line, 1)
        for expr in rules.values():
            for v in variables(expr):
                if v.name not in declared:
                    raise ParseError(f"undeclared variable {v.name!r}", v.line, v.col)
    if modes:
        total = sum(md.probability for md in modes)
        if total != 1:
            raise ParseError(f"mode probabilities sum to {total}, not 1", modes[-1].line, 1)
    if isinstance(target, tuple):
        N = 2 ** len(state_vars)
        bad = [i for i in target if not 1 <= i <= N]
        if bad:
            raise ParseError(f"target index {bad[0]} outside [1, {N}]", *target_pos)
    elif target is not None:
        for v in variables(target):
            if declared.get(v.name) != "state":
                raise ParseError(f"target predicate may only use state variables, found {v.name!r}", v.line, v.col)

    return NetworkSource(tuple(state_vars), tuple(input_vars), base_rules, modes, target)


# --------------------------------------------------------------------------
# compilation


def truth_assignments(var_order: Sequence[str]) -> dict[str, np.ndarray]:
    """Value of every variable in each column of a 2 x 2^k structure matrix (delta order)."""
    k = len(var_order)
    cols = np.arange(2 ** k)
    return {name: ((cols >> (k - 1 - pos)) & 1) == 0 for pos, name in enumerate(var_order)}


def compile_function(expr: Expr, var_order: Sequence[str]) -> LogicalMatrix:
    """Structure matrix L_f (2 x 2^k) of a Boolean expression; true maps to delta_2^1."""
    env = truth_assignments(var_order)
    values = expr.evaluate(env, 2 ** len(var_order))
    return LogicalMatrix.from_index(2, np.where(values, 0, 1))


def _assemble_F(rules: dict[str, Expr], state_vars, input_vars) -> LogicalMatrix:
    order = list(input_vars) + list(state_vars)
    return reduce(khatri_rao, [compile_function(rules[v], order) for v in state_vars])


def target_members(src: NetworkSource, target=None) -> Optional[TargetSet]:
    target = src.target if target is None else target
    N = 2 ** len(src.state_vars)
    if target is None:
        return None
    if isinstance(target, tuple):
        return TargetSet.of(N, target)
    values = target.evaluate(truth_assignments(src.state_vars), N)
    return TargetSet.of(N, (np.flatnonzero(values) + 1).tolist())


def assemble(src: NetworkSource) -> Union[BcnModel, PbcnModel]:
    n, m = len(src.state_vars), len(src.input_vars)
    N, M = 2 ** n, 2 ** m
    names = dict(n=n, m=m, state_names=src.state_vars, input_names=src.input_vars)
    if src.modes:
        return PbcnModel(tuple(_assemble_F(md.rules, src.state_vars, src.input_vars) for md in src.modes),
                         tuple(md.probability for md in src.modes), N, M, **names)
    return BcnModel(_assemble_F(src.rules, src.state_vars, src.input_vars), N, M, **names)


def parse_target(text: str, src: NetworkSource) -> TargetSet:
    """Parse a target override (``{1, 3:5}`` or a predicate) against a network's state variables."""
    toks = _tokenize(text, 1)
    if not toks:
        raise ParseError("empty target", 1, 1)
    ln = _Line(toks, 1, len(text))
    target = _parse_index_set(ln) if toks[0].kind == "{" else ln.expr()
    ln.done()
    if not isinstance(target, tuple):
        for v in variables(target):
            if v.name not in src.state_vars:
                raise ParseError(f"unknown state variable {v.name!r}", v.line, v.col)
    return target_members(src, target)


def parse_index_target(text: str, N: int) -> TargetSet:
    """Parse an index-set target ``{1, 3:5}`` for a model known only by its size."""
    toks = _tokenize(text, 1)
    if not toks or toks[0].kind != "{":
        raise ParseError("expected an index set such as {1, 3:5}", 1, 1)
    ln = _Line(toks, 1, len(text))
    members = _parse_index_set(ln)
    ln.done()
    return TargetSet.of(N, members)
