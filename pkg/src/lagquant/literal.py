"""Text grammar for algebra literals.

Accepted syntax::

    3/2 x1^2 y2 h - x1
    (1 + t)^2 * t^-1
    -s^2 q

Juxtaposition and ``*`` both mean multiplication, and factor order is kept,
so the same parse tree can be evaluated in a noncommutative ring.  ``/`` is
only allowed with a numeric right operand.  The name ``h`` is reserved for
the deformation parameter.
"""

import re
from fractions import Fraction

from .errors import ParseError

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def tokenize(text):
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r} at {pos} in {text!r}")
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", int(num)))
        elif name is not None:
            tokens.append(("name", name))
        else:
            tokens.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r} in {self.text!r}")

    def parse(self):
        if not self.tokens:
            raise ParseError("empty literal")
        node = self.expr()
        if self.i != len(self.tokens):
            raise ParseError(f"trailing input in {self.text!r}")
        return node

    def expr(self):
        kind, val = self.peek()
        negate = False
        if kind == "op" and val in "+-":
            self.take()
            negate = val == "-"
        node = self.term()
        if negate:
            node = ("neg", node)
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                node = ("add", node, rhs) if val == "+" else ("add", node, ("neg", rhs))
            else:
                return node

    def _starts_factor(self):
        kind, val = self.peek()
        return kind in ("num", "name") or (kind == "op" and val == "(")

    def term(self):
        node = self.power()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                node = ("mul", node, self.power())
            elif kind == "op" and val == "/":
                self.take()
                divisor = self.power()
                node = ("div", node, divisor)
            elif self._starts_factor():
                node = ("mul", node, self.power())
            else:
                return node

    def power(self):
        node = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            node = ("pow", node, self.exponent())
        return node

    def exponent(self):
        kind, val = self.peek()
        paren = False
        if kind == "op" and val == "(":
            self.take()
            paren = True
        sign = 1
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        kind, val = self.take()
        if kind != "num":
            raise ParseError(f"exponent must be an integer in {self.text!r}")
        if paren:
            self.expect_op(")")
        return sign * val

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("const", Fraction(val))
        if kind == "name":
            return ("var", val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")


def parse(text):
    """Parse ``text`` into a small tuple-based syntax tree."""
    return _Parser(text).parse()


def constant_value(node):
    """Value of a variable-free subtree, or None."""
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "var":
        return None
    if tag == "neg":
        v = constant_value(node[1])
        return None if v is None else -v
    if tag in ("add", "mul", "div"):
        a, b = constant_value(node[1]), constant_value(node[2])
        if a is None or b is None:
            return None
        if tag == "add":
            return a + b
        if tag == "mul":
            return a * b
        if b == 0:
            raise ParseError("division by zero")
        return a / b
    if tag == "pow":
        a = constant_value(node[1])
        if a is None:
            return None
        if a == 0 and node[2] < 0:
            raise ParseError("division by zero")
        return a ** node[2]
    raise ParseError(f"bad node {tag}")


def evaluate(node, ring):
    """Evaluate a parse tree through ``ring``.

    ``ring`` supplies ``const(Fraction)``, ``var(name)``, ``add``, ``neg``,
    ``mul`` (order preserving), ``pow(x, int)`` and ``scale(x, Fraction)``.
    """
    tag = node[0]
    if tag == "const":
        return ring.const(node[1])
    if tag == "var":
        return ring.var(node[1])
    if tag == "neg":
        return ring.neg(evaluate(node[1], ring))
    if tag == "add":
        return ring.add(evaluate(node[1], ring), evaluate(node[2], ring))
    if tag == "mul":
        return ring.mul(evaluate(node[1], ring), evaluate(node[2], ring))
    if tag == "div":
        divisor = constant_value(node[2])
        if divisor is None:
            raise ParseError("only division by numeric constants is supported")
        if divisor == 0:
            raise ParseError("division by zero")
        return ring.scale(evaluate(node[1], ring), 1 / divisor)
    if tag == "pow":
        return ring.pow(evaluate(node[1], ring), node[2])
    raise ParseError(f"bad node {tag}")
