"""A small arithmetic grammar for function specs on the command line.

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom (("^" | "**") unary)?
    atom   := number ["i" | "j"] | "i" | "j" | "z" | "w" | "pi"
            | "exp" "(" expr ")" | "f[" int "," int "]" | "(" expr ")"

Parsed expressions compile to vectorized numpy callables ``fn(z, w)``.
Nothing is passed to ``eval``.
"""

from __future__ import annotations

import re

import numpy as np

from .schauder import basis_eval

__all__ = ["ExprError", "Expr", "parse"]


class ExprError(ValueError):
    pass


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?[ij]?)
      | (?P<name>[A-Za-z_]+)
      | (?P<op>\*\*|[-+*/^()\[\],])
    )""",
    re.VERBOSE,
)


def _tokenize(src: str):
    pos, out = 0, []
    src = src.strip()
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ExprError(f"unexpected character {src[pos]!r} at position {pos}")
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class Expr:
    """A compiled expression; call it as ``expr(z, w)``."""

    def __init__(self, source: str, fn, constant=None, variables=frozenset()):
        self.source = source
        self._fn = fn
        self.constant = constant
        self.variables = variables

    def __call__(self, z, w=None):
        if w is None:
            w = np.zeros_like(z)
        out = self._fn(z, w)
        if np.ndim(out) == 0 and np.ndim(z) > 0:
            out = np.full(np.shape(z), out, dtype=complex)
        return out

    def __repr__(self):
        return f"Expr({self.source!r})"


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ExprError(f"expected {value!r} at position {tok[2]}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    # each node is (fn, constant_or_None, variables)
    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            tok = self.peek()
            raise ExprError(f"unexpected {tok[1]!r} at position {tok[2]}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = _binary(op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = _binary(op, node, rhs)
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            fn, c, v = self.unary()
            return (lambda z, w: -fn(z, w)), (None if c is None else -c), v
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            exponent = self.unary()
            return _binary("^", base, exponent)
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            if val[-1] in "ij":
                c = complex(0, float(val[:-1]))
            else:
                c = complex(float(val))
            return _const(c)
        if kind == "name":
            if val in ("i", "j"):
                return _const(1j)
            if val == "pi":
                return _const(complex(np.pi))
            if val == "z":
                return (lambda z, w: z), None, frozenset("z")
            if val == "w":
                return (lambda z, w: w), None, frozenset("w")
            if val == "exp":
                self.take("(")
                fn, c, v = self.expr()
                self.take(")")
                if c is not None:
                    return _const(complex(np.exp(c)))
                return (lambda z, w: np.exp(fn(z, w))), None, v
            if val == "f":
                self.take("[")
                p = self._int()
                self.take(",")
                q = self._int()
                self.take("]")
                return (lambda z, w: basis_eval(p, q, np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))), None, frozenset("zw")
            raise ExprError(f"unknown name {val!r} at position {pos}")
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ExprError(f"unexpected {val or 'end of input'!r} at position {pos}")

    def _int(self) -> int:
        kind, val, pos = self.take()
        if kind != "num" or not val.isdigit():
            raise ExprError(f"expected a nonnegative integer index at position {pos}")
        return int(val)


def _const(c: complex):
    return (lambda z, w: c), c, frozenset()


def _binary(op, lhs, rhs):
    f, cf, vf = lhs
    g, cg, vg = rhs
    if cf is not None and cg is not None:
        try:
            val = {"+": cf + cg, "-": cf - cg, "*": cf * cg, "/": cf / cg if cg != 0 else None}.get(op)
            if op == "^":
                val = _pow_const(cf, cg)
        except (ZeroDivisionError, OverflowError):
            val = None
        if val is None:
            raise ExprError("constant subexpression is undefined (division by zero or overflow)")
        return _const(complex(val))
    vars_ = vf | vg
    if op == "+":
        return (lambda z, w: f(z, w) + g(z, w)), None, vars_
    if op == "-":
        return (lambda z, w: f(z, w) - g(z, w)), None, vars_
    if op == "*":
        return (lambda z, w: f(z, w) * g(z, w)), None, vars_
    if op == "/":
        return (lambda z, w: f(z, w) / g(z, w)), None, vars_
    if cg is not None and cg.imag == 0 and float(cg.real).is_integer():
        n = int(cg.real)
        if n >= 0:
            return (lambda z, w: f(z, w) ** n), None, vars_
        return (lambda z, w: 1 / f(z, w) ** (-n)), None, vars_
    return (lambda z, w: np.power(f(z, w), g(z, w))), None, vars_


def _pow_const(a: complex, b: complex) -> complex:
    if b.imag == 0 and float(b.real).is_integer():
        n = int(b.real)
        return a**n if n >= 0 else 1 / a ** (-n)
    return a**b


def parse(source: str) -> Expr:
    """Parse and compile ``source`` into a vectorized callable of ``(z, w)``."""
    if not source or not source.strip():
        raise ExprError("empty expression")
    fn, c, v = _Parser(source).parse()
    return Expr(source, fn, c, v)
