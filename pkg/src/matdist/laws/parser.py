"""Recursive-descent parser for law text.

Grammar (whitespace-insensitive, components separated by ``;``)::

    law     := expr (';' expr)*
    expr    := term (('+' | '-') term)*
    term    := power (('*' | '/') power)*
    power   := unary ('^' power)?          right-associative
    unary   := ('-' | '+') unary | atom
    atom    := NUMBER | variable | FUNC '(' expr ')' | '(' expr ')'
    variable:= 'x' '[' INT ']' | 'y' '[' INT ']'
             | ('yA' | 'yB') '[' INT ']' '[' INT ']'
             | 'yC' '[' INT ']' '[' INT ']' '[' INT ']'

Unary minus binds tighter than ``^``, so ``-a^2`` is ``(-a)^2``.  Subscripts
are 1-based.
"""

import re
from dataclasses import dataclass

from ..exceptions import IndexOutOfRange, ParseError
from .expr import FUNCTIONS, VARIABLE_ARITY, BinOp, Call, Neg, Num, Var, to_text

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()\[\];])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text):
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind != "ws":
                tokens.append(Token(kind, m.group(), line, col))
            col += m.end() - m.start()
        pos = m.end()
    tokens.append(Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text, n):
        self.tokens = tokenize(text)
        self.pos = 0
        self.n = n

    @property
    def tok(self):
        return self.tokens[self.pos]

    def fail(self, expected, message=None):
        t = self.tok
        shown = repr(t.text) if t.kind != "end" else "end of input"
        raise ParseError(message or f"unexpected {shown}", t.line, t.column, expected)

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.fail([repr(text)])

    def law(self):
        comps = [self.expr()]
        while self.accept(";"):
            comps.append(self.expr())
        if self.tok.kind != "end":
            self.fail(["';'", "operator", "end of input"])
        return comps

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.power()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.power())
        return node

    def power(self):
        base = self.unary()
        if self.accept("^"):
            return BinOp("^", base, self.power())
        return base

    def unary(self):
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "num":
            value = float(t.text)
            if value == float("inf"):
                raise ParseError(f"number {t.text} overflows", t.line, t.column)
            self.pos += 1
            return Num(value)
        if t.kind == "name":
            if t.text in FUNCTIONS:
                self.pos += 1
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            if t.text in VARIABLE_ARITY:
                self.pos += 1
                idx = tuple(self.subscript() for _ in range(VARIABLE_ARITY[t.text]))
                return Var(t.text, idx)
            raise ParseError(f"unknown name {t.text!r}", t.line, t.column,
                             sorted(VARIABLE_ARITY) + list(FUNCTIONS))
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail(["number", "variable", "function", "'('", "'-'"])

    def subscript(self):
        self.expect("[")
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            self.fail(["integer subscript"])
        value = int(t.text)
        if not 1 <= value <= self.n:
            raise IndexOutOfRange(f"subscript {value} outside 1..{self.n}", t.line, t.column)
        self.pos += 1
        self.expect("]")
        return value


@dataclass(frozen=True)
class LawExpr:
    """A parsed law: ``d`` component expressions over jets of body dimension ``n``."""

    components: tuple
    n: int
    name: str = ""

    @property
    def d(self):
        return len(self.components)

    @property
    def text(self):
        return to_text(self.components)

    def __str__(self):
        return self.text


def parse_law(text, n=3, d=None, name=""):
    if n < 2:
        raise ValueError("body dimension n must be at least 2")
    if not text or not text.strip():
        raise ParseError("empty law text", 1, 1, ["expression"])
    comps = _Parser(text, n).law()
    if d is not None and len(comps) != d:
        raise ParseError(f"law has {len(comps)} components, expected {d}")
    return LawExpr(tuple(comps), n, name)
