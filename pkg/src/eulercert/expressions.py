"""Single-variable expression parsing and second-order jet evaluation.

The profile functions that parameterize solution families (circulation
strength over time, radial velocity profiles, traveling-wave shapes) are
supplied as strings in a small arithmetic grammar.  Parsed expressions are
evaluated together with their first and second derivatives by propagating
truncated second-order Taylor triples (value, d1, d2) through the tree, so
every profile automatically carries the derivatives that the PDE residual
formulas need.

Grammar summary:

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

'^' binds tightest (so ``-x^2`` is ``-(x^2)``), numeric literals accept
decimal and scientific notation, and whitespace is insignificant.  The
function set is exp, ln, sqrt, sin, cos, atan.  Absolute values are not in
the grammar (they are not twice differentiable); write squared-modulus
profiles as ``(...)^2``.  One identifier is the declared free variable;
any other identifier is a named parameter that must resolve at evaluation
time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "ExpressionError",
    "ParseError",
    "EvalDomainError",
    "UnknownIdentifierError",
    "Jet2",
    "ExprAst",
    "ParamEnv",
    "parse",
    "eval_jet",
    "eval_real",
    "format_expr",
]

MAX_DEPTH = 256

FUNCTION_NAMES = ("exp", "ln", "sqrt", "sin", "cos", "atan")


class ExpressionError(ValueError):
    """Base class for expression parsing and evaluation failures."""


class ParseError(ExpressionError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EvalDomainError(ExpressionError):
    """Raised when evaluation leaves the mathematical domain of a node."""


class UnknownIdentifierError(ExpressionError):
    """Raised when an identifier does not resolve in the parameter environment."""


ParamEnv = dict  # name -> float; missing names are an error, never a default


# ---------------------------------------------------------------------------
# Second-order jets
# ---------------------------------------------------------------------------

Real = Union[float, np.ndarray]


@dataclass(frozen=True)
class Jet2:
    """Value plus first and second derivative with respect to one seed variable.

    Arithmetic follows truncated second-order Taylor rules exactly, e.g.
    ``(f*g).d2 == f.d2*g.value + 2*f.d1*g.d1 + f.value*g.d2``.  Entries may
    be scalars or numpy arrays of a common broadcastable shape, so a single
    evaluation can cover a whole batch of seed points.
    """

    value: Real
    d1: Real
    d2: Real

    @staticmethod
    def variable(x: Real) -> "Jet2":
        """Seed for the free variable: (x, 1, 0)."""
        return Jet2(x, 1.0, 0.0)

    @staticmethod
    def constant(k: Real) -> "Jet2":
        """Seed for a constant: (k, 0, 0)."""
        return Jet2(k, 0.0, 0.0)

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.d1 - other.d1, self.d2 - other.d2)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.d1, -self.d2)

    def __mul__(self, other: "Jet2") -> "Jet2":
        return Jet2(
            self.value * other.value,
            self.d1 * other.value + self.value * other.d1,
            self.d2 * other.value + 2.0 * self.d1 * other.d1 + self.value * other.d2,
        )

    def __truediv__(self, other: "Jet2") -> "Jet2":
        q0 = self.value / other.value
        q1 = (self.d1 - q0 * other.d1) / other.value
        q2 = (self.d2 - 2.0 * q1 * other.d1 - q0 * other.d2) / other.value
        return Jet2(q0, q1, q2)


def _chain(u: Jet2, f0: Real, f1: Real, f2: Real) -> Jet2:
    """Compose a scalar function (given f(u), f'(u), f''(u)) with a jet."""
    return Jet2(f0, f1 * u.d1, f2 * u.d1 * u.d1 + f1 * u.d2)


def _jet_exp(u: Jet2) -> Jet2:
    e = np.exp(u.value)
    return _chain(u, e, e, e)


def _jet_ln(u: Jet2) -> Jet2:
    if np.any(np.asarray(u.value) <= 0.0):
        raise EvalDomainError("ln requires a positive argument")
    inv = 1.0 / u.value
    return _chain(u, np.log(u.value), inv, -inv * inv)


def _jet_sqrt(u: Jet2) -> Jet2:
    if np.any(np.asarray(u.value) <= 0.0):
        raise EvalDomainError("sqrt requires a positive argument")
    s = np.sqrt(u.value)
    f1 = 0.5 / s
    return _chain(u, s, f1, -0.25 / (s * u.value))


def _jet_sin(u: Jet2) -> Jet2:
    s, c = np.sin(u.value), np.cos(u.value)
    return _chain(u, s, c, -s)


def _jet_cos(u: Jet2) -> Jet2:
    s, c = np.sin(u.value), np.cos(u.value)
    return _chain(u, c, -s, -c)


def _jet_atan(u: Jet2) -> Jet2:
    den = 1.0 + u.value * u.value
    return _chain(u, np.arctan(u.value), 1.0 / den, -2.0 * u.value / (den * den))


_JET_FUNCTIONS = {
    "exp": _jet_exp,
    "ln": _jet_ln,
    "sqrt": _jet_sqrt,
    "sin": _jet_sin,
    "cos": _jet_cos,
    "atan": _jet_atan,
}

_INT_POW_LIMIT = 1000  # beyond this an integer exponent routes through exp/ln


def _jet_int_pow(base: Jet2, n: int) -> Jet2:
    """base**n for integer n by repeated multiplication (exact jet rules)."""
    if n == 0:
        one = np.ones_like(np.asarray(base.value, dtype=float))
        return Jet2(one if one.ndim else 1.0, 0.0, 0.0)
    if n < 0:
        pos = _jet_int_pow(base, -n)
        if np.any(np.asarray(pos.value) == 0.0):
            raise EvalDomainError("negative power of zero")
        one = Jet2.constant(1.0)
        return one / pos
    result = None
    square = base
    k = n
    while k:
        if k & 1:
            result = square if result is None else result * square
        k >>= 1
        if k:
            square = square * square
    return result


def _jet_pow(base: Jet2, expo: Jet2) -> Jet2:
    expo_constant = (
        np.ndim(expo.d1) == 0
        and np.ndim(expo.d2) == 0
        and expo.d1 == 0.0
        and expo.d2 == 0.0
        and np.ndim(expo.value) == 0
    )
    if expo_constant and float(expo.value).is_integer() and abs(expo.value) <= _INT_POW_LIMIT:
        return _jet_int_pow(base, int(expo.value))
    if np.any(np.asarray(base.value) <= 0.0):
        raise EvalDomainError("a^b with non-integer b requires a > 0")
    return _jet_exp(expo * _jet_ln(base))


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    def depth(self) -> int:
        raise NotImplementedError

    def param_names(self) -> frozenset:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Node):
    value: float

    def depth(self):
        return 1

    def param_names(self):
        return frozenset()


@dataclass(frozen=True)
class Var(Node):
    name: str

    def depth(self):
        return 1

    def param_names(self):
        return frozenset()


@dataclass(frozen=True)
class Param(Node):
    name: str

    def depth(self):
        return 1

    def param_names(self):
        return frozenset({self.name})


@dataclass(frozen=True)
class Neg(Node):
    child: Node

    def depth(self):
        return 1 + self.child.depth()

    def param_names(self):
        return self.child.param_names()


@dataclass(frozen=True)
class Bin(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node

    def depth(self):
        return 1 + max(self.left.depth(), self.right.depth())

    def param_names(self):
        return self.left.param_names() | self.right.param_names()


@dataclass(frozen=True)
class Call(Node):
    fn: str
    arg: Node

    def depth(self):
        return 1 + self.arg.depth()

    def param_names(self):
        return self.arg.param_names()


ExprAst = Node


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            kind = m.lastgroup
            if kind == "number":
                kind = "num"
            tokens.append((kind, m.group(), m.start()))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, variable_name: str):
        self.tokens = tokens
        self.i = 0
        self.variable_name = variable_name
        self.depth = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, val, pos = self.peek()
        if val != text:
            raise ParseError(f"expected {text!r}", pos)
        return self.advance()

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ParseError("expression too deeply nested", self.peek()[2])

    def _leave(self):
        self.depth -= 1

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Node:
        self._enter()
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            node = Bin(op, node, self.term())
        self._leave()
        return node

    def term(self) -> Node:
        self._enter()
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.advance()[1]
            node = Bin(op, node, self.unary())
        self._leave()
        return node

    def unary(self) -> Node:
        self._enter()
        if self.peek()[1] == "-":
            self.advance()
            node = Neg(self.unary())
        else:
            node = self.power()
        self._leave()
        return node

    def power(self) -> Node:
        self._enter()
        node = self.atom()
        if self.peek()[1] == "^":
            self.advance()
            node = Bin("^", node, self.unary())  # right-assoc, exponent may be signed
        self._leave()
        return node

    def atom(self) -> Node:
        self._enter()
        kind, val, pos = self.peek()
        if kind == "num":
            self.advance()
            node = Num(float(val))
        elif kind == "ident":
            self.advance()
            if self.peek()[1] == "(":
                if val not in FUNCTION_NAMES:
                    raise ParseError(f"unknown function {val!r}", pos)
                self.advance()
                arg = self.expr()
                self.expect(")")
                node = Call(val, arg)
            elif val == self.variable_name:
                node = Var(val)
            else:
                # recorded as a parameter; resolution is checked at evaluation
                node = Param(val)
        elif val == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
        else:
            raise ParseError("expected expression", pos)
        self._leave()
        return node


def parse(text: str, variable_name: str) -> ExprAst:
    """Parse ``text`` into an AST whose free variable is ``variable_name``.

    Raises ParseError (with a 0-based position) on malformed input or an
    unknown function name.  Identifiers other than the free variable are
    accepted as parameters and checked when evaluated.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(_tokenize(text), variable_name).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_jet(ast: ExprAst, seed: Jet2, params: ParamEnv | None = None) -> Jet2:
    """Evaluate ``ast`` and its first two derivatives at ``seed``.

    ``seed`` is the jet of the free variable, normally ``Jet2.variable(x)``;
    its value may be a numpy array to evaluate a whole batch at once.
    Parameters are looked up in ``params`` and enter as constants.
    """
    params = params or {}
    if isinstance(ast, Num):
        return Jet2.constant(ast.value)
    if isinstance(ast, Var):
        return seed
    if isinstance(ast, Param):
        try:
            return Jet2.constant(float(params[ast.name]))
        except KeyError:
            raise UnknownIdentifierError(
                f"identifier {ast.name!r} is neither the free variable nor a known parameter"
            ) from None
    if isinstance(ast, Neg):
        return -eval_jet(ast.child, seed, params)
    if isinstance(ast, Bin):
        left = eval_jet(ast.left, seed, params)
        right = eval_jet(ast.right, seed, params)
        if ast.op == "+":
            return left + right
        if ast.op == "-":
            return left - right
        if ast.op == "*":
            return left * right
        if ast.op == "/":
            if np.any(np.asarray(right.value) == 0.0):
                raise EvalDomainError(f"division by zero in {format_expr(ast)}")
            return left / right
        if ast.op == "^":
            try:
                return _jet_pow(left, right)
            except EvalDomainError as e:
                raise EvalDomainError(f"{e} in {format_expr(ast)}") from None
        raise AssertionError(ast.op)
    if isinstance(ast, Call):
        arg = eval_jet(ast.arg, seed, params)
        try:
            return _JET_FUNCTIONS[ast.fn](arg)
        except EvalDomainError as e:
            raise EvalDomainError(f"{e} in {format_expr(ast)}") from None
    raise AssertionError(type(ast))


def eval_real(ast: ExprAst, x: Real, params: ParamEnv | None = None) -> Real:
    """Evaluate the plain value of ``ast`` at ``x`` (scalar or array)."""
    return eval_jet(ast, Jet2.variable(x), params).value


def format_expr(ast: ExprAst) -> str:
    """Render an AST back to parseable text (fully parenthesized)."""
    if isinstance(ast, Num):
        return repr(ast.value)
    if isinstance(ast, (Var, Param)):
        return ast.name
    if isinstance(ast, Neg):
        return f"(-{format_expr(ast.child)})"
    if isinstance(ast, Bin):
        return f"({format_expr(ast.left)} {ast.op} {format_expr(ast.right)})"
    if isinstance(ast, Call):
        return f"{ast.fn}({format_expr(ast.arg)})"
    raise AssertionError(type(ast))
