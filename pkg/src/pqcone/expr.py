"""Small arithmetic expression language for nonlinearities such as ``f(x, u, v)``.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

So ``-2^2 == -4`` and ``2^-1 == 0.5``.  Evaluation is vectorised over numpy
arrays and always in float64.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

DEFAULT_VARIABLES = ("x", "y", "u", "v")
CONSTANTS = {"pi": math.pi}

# name -> arity
FUNCTIONS = {
    "atan": 1, "sin": 1, "cos": 1, "exp": 1, "log": 1, "sqrt": 1, "abs": 1,
    "min": 2, "max": 2, "pow": 2,
}


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class ArityError(ExprError):
    def __init__(self, name: str, expected: int, got: int, offset: int):
        super().__init__(f"{name}() takes {expected} argument(s), got {got} (offset {offset})")
        self.name = name
        self.offset = offset


class MissingBindingError(ExprError):
    def __init__(self, name: str):
        super().__init__(f"no value bound for variable {name!r}")
        self.name = name


class EvalDomainError(ExprError):
    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in {subexpr}")
        self.reason = message
        self.subexpr = subexpr


# -- AST ---------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    offset: int = 0


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = 0


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    offset: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    offset: int = 0


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    offset: int = 0


Node = Num | Var | Neg | BinOp | Call


def render(node: Node) -> str:
    """Fully parenthesised source for ``node``; parses back to the same tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{render(node.operand)})"
    if isinstance(node, BinOp):
        return f"({render(node.left)} {node.op} {render(node.right)})"
    return f"{node.name}({', '.join(render(a) for a in node.args)})"


# -- tokenizer ---------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),]|·)
    """,
    re.VERBOSE,
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", _byte_offset(src, pos))
        kind = m.lastgroup
        if kind != "ws":
            text = m.group()
            if text == "·":
                text = "*"
            toks.append((kind, text, _byte_offset(src, pos)))
        pos = m.end()
    toks.append(("end", "", _byte_offset(src, len(src))))
    return toks


def _byte_offset(src: str, i: int) -> int:
    return len(src[:i].encode("utf-8"))


class _Parser:
    def __init__(self, src: str, variables: Sequence[str]):
        self.toks = _tokenize(src)
        self.i = 0
        self.variables = set(variables)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        kind, t, off = self.take()
        if t != text:
            found = "end of input" if kind == "end" else repr(t)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, t, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {t!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, off = self.take()
            node = BinOp(op, node, self.term(), off)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, off = self.take()
            node = BinOp(op, node, self.unary(), off)
        return node

    def unary(self):
        kind, t, off = self.peek()
        if kind == "op" and t == "-":
            self.take()
            return Neg(self.unary(), off)
        return self.power()

    def power(self):
        base = self.atom()
        kind, t, off = self.peek()
        if kind == "op" and t == "^":
            self.take()
            return BinOp("^", base, self.unary(), off)
        return base

    def atom(self):
        kind, t, off = self.take()
        if kind == "num":
            return Num(float(t), off)
        if kind == "name":
            if self.peek()[1] == "(":
                if t not in FUNCTIONS:
                    raise UnknownIdentifierError(t, off)
                self.take()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCTIONS[t]:
                    raise ArityError(t, FUNCTIONS[t], len(args), off)
                return Call(t, tuple(args), off)
            if t in self.variables:
                return Var(t, off)
            if t in CONSTANTS:
                return Num(CONSTANTS[t], off)
            if t in FUNCTIONS:
                raise ArityError(t, FUNCTIONS[t], 0, off)
            raise UnknownIdentifierError(t, off)
        if kind == "op" and t == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(t)
        raise ExprSyntaxError(f"unexpected {found}", off)


# -- public API --------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    """Parsed expression.  Immutable; evaluate with :meth:`eval`."""

    root: Node
    source: str
    allowed: tuple[str, ...] = DEFAULT_VARIABLES

    @property
    def variables(self) -> frozenset[str]:
        out = set()
        stack = [self.root]
        while stack:
            n = stack.pop()
            if isinstance(n, Var):
                out.add(n.name)
            elif isinstance(n, Neg):
                stack.append(n.operand)
            elif isinstance(n, BinOp):
                stack += [n.left, n.right]
            elif isinstance(n, Call):
                stack += list(n.args)
        return frozenset(out)

    def depends_on(self, *names: str) -> bool:
        return bool(self.variables.intersection(names))

    def render(self) -> str:
        return render(self.root)

    def eval(self, env: Mapping[str, object] | None = None, **kw):
        return evaluate(self, {**(env or {}), **kw})

    def __call__(self, **env):
        return evaluate(self, env)

    def __str__(self):
        return self.source


def parse(source: str, variables: Sequence[str] = DEFAULT_VARIABLES) -> Expr:
    """Parse ``source``; ``variables`` lists the admissible variable names."""
    if not isinstance(source, str):
        source = repr(float(source))
    return Expr(_Parser(source, variables).parse(), source, tuple(variables))


def constant(c: float) -> Expr:
    return parse(repr(float(c)))


def evaluate(e: Expr, env: Mapping[str, object]):
    """Evaluate ``e`` with variable bindings ``env`` (scalars or arrays).

    Returns a float when every binding is scalar, otherwise an ndarray.
    """
    out = _eval(e.root, env)
    if np.ndim(out) == 0:
        return float(out)
    return out


def _fail(msg: str, node: Node):
    raise EvalDomainError(msg, render(node))


def _finite(val, node):
    if not np.all(np.isfinite(val)):
        _fail("non-finite result", node)
    return val


def _eval(node: Node, env):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        if node.name not in env:
            raise MissingBindingError(node.name)
        return np.asarray(env[node.name], dtype=float)
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        with np.errstate(all="ignore"):
            if node.op == "+":
                return _finite(a + b, node)
            if node.op == "-":
                return _finite(a - b, node)
            if node.op == "*":
                return _finite(a * b, node)
            if node.op == "/":
                if np.any(b == 0):
                    _fail("division by zero", node)
                return _finite(a / b, node)
            return _power(a, b, node)
    a = [_eval(x, env) for x in node.args]
    name = node.name
    with np.errstate(all="ignore"):
        if name == "log":
            if np.any(a[0] <= 0):
                _fail("log of nonpositive value", node)
            return np.log(a[0])
        if name == "sqrt":
            if np.any(a[0] < 0):
                _fail("sqrt of negative value", node)
            return np.sqrt(a[0])
        if name == "pow":
            return _power(a[0], a[1], node)
        fn = {"atan": np.arctan, "sin": np.sin, "cos": np.cos, "exp": np.exp,
              "abs": np.abs, "min": np.minimum, "max": np.maximum}[name]
        return _finite(fn(*a), node)


def _power(a, b, node):
    if np.any((a < 0) & (b != np.round(b))):
        _fail("negative base with non-integer exponent", node)
    if np.any((a == 0) & (b < 0)):
        _fail("zero raised to a negative power", node)
    with np.errstate(all="ignore"):
        return _finite(np.power(a, b), node)
