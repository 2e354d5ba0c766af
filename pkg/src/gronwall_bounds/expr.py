"""Hand-written LL(1) parser for signal expressions.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | primary
    primary := NUMBER | 't' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := 'sin' | 'cos' | 'exp' | 'abs'

Unary minus binds tighter than ``*`` and ``/``. The compiled expression
is a closure evaluating on numpy arrays of times.
"""

import re

import numpy as np

from .errors import GronwallError
from .signal import Signal

__all__ = ["ExpressionError", "parse_signal_expression", "compile_expression"]

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}
CONSTANTS = {"pi": np.pi}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/()])
    """,
    re.VERBOSE,
)


class ExpressionError(GronwallError, ValueError):
    """Lexical or syntax error; ``position`` is a 0-based column."""

    def __init__(self, message, text, position):
        self.text = text
        self.position = position
        super().__init__(f"{message} at column {position + 1}: {text!r}")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.tok
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionError(f"expected {value!r}, found {found}", self.text, pos)
        self.advance()

    def parse(self):
        node = self.expr()
        kind, text, pos = self.tok
        if kind != "end":
            raise ExpressionError(f"unexpected {text!r}", self.text, pos)
        return node

    def expr(self):
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.advance()[1]
            rhs = self.term()
            node = _binary(op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.advance()[1]
            rhs = self.unary()
            node = _binary(op, node, rhs)
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] in ("-", "+"):
            op = self.advance()[1]
            inner = self.unary()
            if op == "-":
                return lambda t: -inner(t)
            return inner
        return self.primary()

    def primary(self):
        kind, text, pos = self.tok
        if kind == "num":
            self.advance()
            value = float(text)
            return lambda t: np.full(np.shape(t), value)
        if kind == "name":
            self.advance()
            if text == "t":
                return lambda t: np.asarray(t, dtype=float)
            if text in CONSTANTS:
                value = CONSTANTS[text]
                return lambda t: np.full(np.shape(t), value)
            if text in FUNCTIONS:
                fn = FUNCTIONS[text]
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return lambda t: fn(arg(t))
            raise ExpressionError(f"unknown identifier {text!r}", self.text, pos)
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionError(f"expected a number, 't', a function or '(', found {found}", self.text, pos)


def _binary(op, a, b):
    if op == "+":
        return lambda t: a(t) + b(t)
    if op == "-":
        return lambda t: a(t) - b(t)
    if op == "*":
        return lambda t: a(t) * b(t)
    return lambda t: a(t) / b(t)


def compile_expression(text):
    """Compile ``text`` to a function of a time array."""
    if not isinstance(text, str):
        raise TypeError(f"expression must be a string, got {type(text).__name__}")
    return _Parser(text).parse()


def parse_signal_expression(text):
    """Closed-form :class:`Signal` for an expression in ``t``.

    >>> parse_signal_expression("exp(t)*2")(0.0)
    2.0
    """
    fn = compile_expression(text)

    def evaluate(t):
        with np.errstate(all="ignore"):
            return fn(t)

    return Signal.from_function(evaluate, label=text)
