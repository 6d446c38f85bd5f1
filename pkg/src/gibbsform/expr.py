"""Arithmetic expressions for defining functions read from config files.

Grammar: numbers, identifiers, ``+ - * / ^``, unary minus, parentheses and
the functions ``ln`` (alias ``log``) and ``exp``.  ``^`` binds tighter than
unary minus and is right-associative.  Compiled expressions evaluate with
dual numbers, so they can be differentiated.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Callable, Sequence

from . import calculus as calc
from .calculus import ScalarField
from .geometry import canonical_name

FUNCTIONS = {"ln": calc.log, "log": calc.log, "exp": calc.exp}


class ExpressionError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column
        self.reason = message


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    text: str
    column: int  # 1-based


def _is_name_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_name_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_" or unicodedata.combining(ch) != 0


def tokenize(text: str) -> list[Token]:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit() or (ch == "." and i + 1 < len(text) and text[i + 1].isdigit()):
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < len(text) and text[j] in "eE":
                k = j + 1
                if k < len(text) and text[k] in "+-":
                    k += 1
                if k < len(text) and text[k].isdigit():
                    j = k
                    while j < len(text) and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                float(lit)
            except ValueError:
                raise ExpressionError(f"malformed number {lit!r}", i + 1) from None
            out.append(Token("num", lit, i + 1))
            i = j
        elif _is_name_start(ch):
            j = i + 1
            while j < len(text) and _is_name_char(text[j]):
                j += 1
            out.append(Token("name", text[i:j], i + 1))
            i = j
        elif ch in "+-*/^()−":
            out.append(Token("op", "-" if ch == "−" else ch, i + 1))
            i += 1
        else:
            raise ExpressionError(f"unexpected character {ch!r}", i + 1)
    out.append(Token("end", "", len(text) + 1))
    return out


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = tokenize(text)
        self.pos = 0
        self.index = {canonical_name(v): k for k, v in enumerate(variables)}
        self.used: set[str] = set()

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.take()
        if tok.text != text:
            raise ExpressionError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.column)

    def parse(self) -> Callable:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionError(f"unexpected {tok.text!r}", tok.column)
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.take().text
            rhs = self.term()
            node = _add(node, rhs) if op == "+" else _sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/") and self.peek().kind == "op":
            op = self.take().text
            rhs = self.unary()
            node = _mul(node, rhs) if op == "*" else _div(node, rhs)
        return node

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("+", "-"):
            self.take()
            inner = self.unary()
            return inner if tok.text == "+" else (lambda q: -inner(q))
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            exponent = self.unary()
            return lambda q: base(q) ** exponent(q)
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            value = float(tok.text)
            return lambda q: value
        if tok.kind == "name":
            if self.peek().text == "(" and self.peek().kind == "op":
                fn = FUNCTIONS.get(tok.text)
                if fn is None:
                    raise ExpressionError(f"unknown function {tok.text!r}", tok.column)
                self.take()
                arg = self.expr()
                self.expect(")")
                return lambda q: fn(arg(q))
            name = canonical_name(tok.text)
            if name not in self.index:
                known = ", ".join(self.index) or "none"
                raise ExpressionError(f"unknown variable {tok.text!r} (known: {known})", tok.column)
            self.used.add(name)
            k = self.index[name]
            return lambda q: q[k]
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionError(f"unexpected {tok.text or 'end of input'!r}", tok.column)


def _add(a, b):
    return lambda q: a(q) + b(q)


def _sub(a, b):
    return lambda q: a(q) - b(q)


def _mul(a, b):
    return lambda q: a(q) * b(q)


def _div(a, b):
    def f(q):
        den = b(q)
        if calc.real_part(den) == 0.0:
            raise calc.DomainError("division by zero")
        return a(q) / den

    return f


def compile_expression(text: str, variables: Sequence[str]) -> ScalarField:
    """Compile ``text`` into a :class:`ScalarField` over ``variables`` (in order)."""
    fn = _Parser(text, variables).parse()
    names = tuple(canonical_name(v) for v in variables)
    return ScalarField(len(names), fn, names)


def compile_univariate(text: str, variable: str) -> Callable:
    """An expression in one variable as a plain ``f(x)`` callable."""
    field = compile_expression(text, [variable])
    return lambda x: field.evaluator([x])
