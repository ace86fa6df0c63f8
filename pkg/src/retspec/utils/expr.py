"""Coefficient-function expressions: parsing and vectorized evaluation.

Grammar, lowest precedence first::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "x" | "pi" | FUNC "(" expr ("," expr)* ")" | "(" expr ")"

Offsets in errors are byte offsets into the UTF-8 source.
"""

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from ..exceptions import ExprEvaluationError, ExprSyntaxError, UnknownIdentifierError

FUNCTIONS: Dict[str, Tuple[Callable, int, Optional[int]]] = {
    # name: (implementation, min args, max args)
    "sin": (np.sin, 1, 1),
    "cos": (np.cos, 1, 1),
    "exp": (np.exp, 1, 1),
    "abs": (np.abs, 1, 1),
    "min": (lambda *args: np.minimum.reduce(np.broadcast_arrays(*args)), 2, None),
    "max": (lambda *args: np.maximum.reduce(np.broadcast_arrays(*args)), 2, None),
}
CONSTANTS = {"pi": math.pi}
VARIABLE = "x"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

_ATOM_START = ("number", "identifier", "(", "-")


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int


def tokenize(src: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    byte_offset = 0
    while pos < len(src):
        match = _TOKEN_RE.match(src, pos)
        if match is None:
            raise ExprSyntaxError(byte_offset, list(_ATOM_START) + ["operator"], src)
        text = match.group()
        if match.lastgroup != "ws":
            tokens.append(Token(match.lastgroup, text, byte_offset))
        byte_offset += len(text.encode("utf-8"))
        pos = match.end()
    tokens.append(Token("end", "", byte_offset))
    return tokens


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    offset: int


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Node", ...]
    offset: int


Node = Union[Num, Var, Neg, BinOp, Call]


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def at(self, text: str) -> bool:
        return self.current.kind == "op" and self.current.text == text

    def fail(self, expected) -> None:
        raise ExprSyntaxError(self.current.offset, expected, self.src)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail([text])
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            self.fail(["+", "-", "*", "/", "^", "end of input"])
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance()
            node = BinOp(op.text, node, self.term(), op.offset)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance()
            node = BinOp(op.text, node, self.unary(), op.offset)
        return node

    def unary(self) -> Node:
        if self.at("-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at("^"):
            op = self.advance()
            return BinOp("^", base, self.unary(), op.offset)
        return base

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Num(float(token.text))
        if token.kind == "ident":
            self.advance()
            if token.text == VARIABLE:
                return Var()
            if token.text in CONSTANTS:
                return Num(CONSTANTS[token.text])
            if token.text not in FUNCTIONS:
                raise UnknownIdentifierError(token.text, token.offset)
            return self.call(token)
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(_ATOM_START)

    def call(self, name: Token) -> Node:
        self.expect("(")
        args = [self.expr()]
        while self.at(","):
            self.advance()
            args.append(self.expr())
        self.expect(")")
        _, least, most = FUNCTIONS[name.text]
        if len(args) < least or (most is not None and len(args) > most):
            wanted = str(least) if most == least else f"at least {least}"
            raise ExprSyntaxError(
                name.offset, [f"{name.text} with {wanted} argument(s)"], self.src
            )
        return Call(name.text, tuple(args), name.offset)


def _evaluate(node: Node, x: np.ndarray):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_evaluate(node.operand, x)
    if isinstance(node, Call):
        fn = FUNCTIONS[node.name][0]
        return fn(*(_evaluate(arg, x) for arg in node.args))

    left = _evaluate(node.left, x)
    right = _evaluate(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if np.any(np.asarray(right) == 0):
            raise ExprEvaluationError(f"division by zero at offset {node.offset}")
        return left / right
    exponent = np.asarray(right, dtype=float)
    if np.any(exponent != np.round(exponent)):
        raise ExprEvaluationError(f"non-integer exponent at offset {node.offset}")
    if np.any((exponent < 0) & (np.asarray(left) == 0)):
        raise ExprEvaluationError(f"zero raised to a negative power at offset {node.offset}")
    return np.power(np.asarray(left, dtype=float), exponent)


@dataclass(frozen=True)
class Expr:
    """A parsed expression in the variable x."""

    source: str
    root: Node

    def __call__(self, x):
        """Evaluate at a scalar or array; the result has x's shape."""
        xs = np.asarray(x, dtype=float)
        value = np.broadcast_to(np.asarray(_evaluate(self.root, xs), dtype=float), xs.shape)
        return float(value) if value.ndim == 0 else value.copy()


def parse_expr(src: str) -> Expr:
    """Parse ``src``; raises ExprSyntaxError or UnknownIdentifierError."""
    return Expr(src, _Parser(src).parse())
