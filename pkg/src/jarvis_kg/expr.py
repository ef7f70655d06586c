"""Closed expression language for characteristic update methods.

Replaces embedded general-purpose code with a safe grammar: decimal
constants, declared argument references, per-subsystem conditionals
(``if sub == 'LPC' { ... } else { ... }``), arithmetic (+ - * / ^) and the
functions min, max, abs, sqrt, log.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from jarvis_kg.errors import EvalError, ExprSyntaxError, UnknownIdentifier

SUBSYSTEM_KINDS = ("fan", "LPC", "IPC", "HPC")

_FUNCTIONS = {
    "min": (2, min),
    "max": (2, max),
    "abs": (1, abs),
    "sqrt": (1, math.sqrt),
    "log": (1, math.log),
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Arg:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Node", ...]


@dataclass(frozen=True)
class IfChain:
    branches: tuple[tuple[str, "Node"], ...]  # (subsystem kind, value)
    otherwise: "Node"


Node = Union[Num, Arg, BinOp, Neg, Call, IfChain]


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<string>'[^']*'|\"[^\"]*\")|(?P<op>==|[+\-*/^(){},]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(src, pos)
        if not m or m.start(m.lastgroup) != pos:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos)
        tokens.append((m.lastgroup, m.group(m.lastgroup), pos))
        pos = m.end()
    tokens.append(("eof", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, tokens, args: tuple[str, ...]):
        self.tokens = tokens
        self.args = args
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str):
        tok = self.peek()
        raise ExprSyntaxError(message, tok[2])

    def expect(self, kind: str, value: str):
        tok = self.next()
        if tok[0] != kind or tok[1] != value:
            raise ExprSyntaxError(f"expected {value!r}", tok[2])

    def parse(self) -> Node:
        node = self.body()
        if self.peek()[0] != "eof":
            self.fail("trailing input")
        return node

    def body(self) -> Node:
        if self.peek()[:2] == ("ident", "if"):
            return self.if_chain()
        return self.expr()

    def if_chain(self) -> Node:
        branches: list[tuple[str, Node]] = []
        while True:
            self.expect("ident", "if")
            self.expect("ident", "sub")
            self.expect("op", "==")
            tok = self.next()
            if tok[0] != "string":
                raise ExprSyntaxError("expected quoted subsystem kind", tok[2])
            raw_kind = tok[1][1:-1]
            kind = next(
                (k for k in SUBSYSTEM_KINDS if k.lower() == raw_kind.lower()), None
            )
            if kind is None:
                raise ExprSyntaxError(f"unknown subsystem kind {raw_kind!r}", tok[2])
            self.expect("op", "{")
            value = self.body()
            self.expect("op", "}")
            branches.append((kind, value))
            self.expect("ident", "else")
            if self.peek()[:2] == ("ident", "if"):
                continue
            self.expect("op", "{")
            otherwise = self.body()
            self.expect("op", "}")
            return IfChain(tuple(branches), otherwise)

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.next()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.next()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.next()
            return BinOp("^", base, self.unary())  # right-associative
        return base

    def atom(self) -> Node:
        tok = self.next()
        kind, value, pos = tok
        if kind == "number":
            return Num(float(value))
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect("op", ")")
            return node
        if kind == "ident":
            if value in _FUNCTIONS:
                self.expect("op", "(")
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.next()
                    args.append(self.expr())
                self.expect("op", ")")
                arity = _FUNCTIONS[value][0]
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"{value} takes {arity} argument(s), got {len(args)}", pos
                    )
                return Call(value, tuple(args))
            if value in ("if", "else", "sub"):
                raise ExprSyntaxError(f"misplaced keyword {value!r}", pos)
            if value not in self.args:
                raise UnknownIdentifier(value)
            return Arg(value)
        raise ExprSyntaxError("expected expression", pos)


def parse_expression(src: str, func_args: tuple[str, ...]) -> Node:
    """Parse the expression body; identifiers must be in func_args."""
    return _Parser(_tokenize(src), tuple(func_args)).parse()


def eval_expression(node: Node, subsystem_kind: str, arg_values: dict[str, float]) -> float:
    """Strict evaluation; domain errors raise EvalError, never NaN/inf."""
    result = _eval(node, subsystem_kind, arg_values)
    if not math.isfinite(result):
        raise EvalError("expression produced a non-finite value")
    return result


def _eval(node: Node, sub: str, values: dict[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Arg):
        if node.name not in values:
            raise EvalError(f"no value supplied for argument '{node.name}'")
        return float(values[node.name])
    if isinstance(node, Neg):
        return -_eval(node.operand, sub, values)
    if isinstance(node, BinOp):
        left = _eval(node.left, sub, values)
        right = _eval(node.right, sub, values)
        try:
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if node.op == "/":
                if right == 0.0:
                    raise EvalError("division by zero")
                return left / right
            result = left ** right
            if isinstance(result, complex):
                raise EvalError("fractional power of a negative base")
            return result
        except OverflowError as exc:
            raise EvalError("arithmetic overflow") from exc
        except ZeroDivisionError as exc:
            raise EvalError("division by zero") from exc
    if isinstance(node, Call):
        args = [_eval(a, sub, values) for a in node.args]
        if node.fn == "log" and args[0] <= 0.0:
            raise EvalError("log of a non-positive value")
        if node.fn == "sqrt" and args[0] < 0.0:
            raise EvalError("sqrt of a negative value")
        return float(_FUNCTIONS[node.fn][1](*args))
    if isinstance(node, IfChain):
        for kind, value in node.branches:
            if kind == sub:
                return _eval(value, sub, values)
        return _eval(node.otherwise, sub, values)
    raise EvalError(f"unknown node {node!r}")  # pragma: no cover
