"""Lexer and recursive-descent parser for the Lustre subset.

Precedence, loosest first: ``if``; ``->`` (right); ``=>`` (right);
``or``/``xor``; ``and``; comparisons (non-associative); ``+ -``;
``* / div mod``; unary ``-``/``not``/``pre``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import List, Optional, Tuple

from .ast import (Arrow, Assertion, Binary, BoolLit, Call, ConstDecl, Directive,
                  Equation, IfThenElse, Ident, Node, Num, Param, Pre, Program,
                  Span, Unary)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.col}: {self.code}: {self.message}"


class LustreError(Exception):
    """Frontend failure with one or more located diagnostics."""

    def __init__(self, code: str, message: str, span: Span = Span(0, 0), more=()):
        self.diagnostics = [Diagnostic(code, message, span), *more]
        super().__init__(str(self.diagnostics[0]))

    @property
    def code(self) -> str:
        return self.diagnostics[0].code

    @property
    def span(self) -> Span:
        return self.diagnostics[0].span


class ParseError(LustreError):
    def __init__(self, message: str, span: Span):
        super().__init__("ParseError", message, span)


KEYWORDS = {
    "node", "function", "returns", "var", "let", "tel", "const", "assert",
    "if", "then", "else", "pre", "and", "or", "xor", "not", "div", "mod",
    "true", "false", "int", "real", "bool",
}
DIRECTIVES = ("REALIZABLE", "PROPERTY")


@dataclass(frozen=True)
class Token:
    kind: str  # 'id' 'kw' 'num' 'op' 'dir' 'eof'
    text: str
    span: Span


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<dir>--%[A-Za-z_]+)
  | (?P<line>--[^\n]*)
  | (?P<block>\(\*|/\*)
  | (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|=>|<=|>=|<>|[-+*/<>=(),;:])
""", re.VERBOSE)


def tokenize(text: str) -> List[Token]:
    out: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = Span(line, pos - line_start + 1)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "block":
            close = "*)" if lexeme == "(*" else "*/"
            end = text.find(close, m.end())
            if end < 0:
                raise ParseError("unterminated comment", span)
            body = text[pos:end + 2]
            nls = body.count("\n")
            if nls:
                line += nls
                line_start = pos + body.rfind("\n") + 1
            pos = end + 2
            continue
        elif kind == "dir":
            name = lexeme[3:]
            if name not in DIRECTIVES:
                raise ParseError(f"unknown directive {lexeme}", span)
            out.append(Token("dir", name, span))
        elif kind in ("num", "op"):
            out.append(Token(kind, lexeme, span))
        elif kind == "id":
            out.append(Token("kw" if lexeme in KEYWORDS else "id", lexeme, span))
        pos = m.end()
    out.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return out


def parse_number(text: str) -> Tuple[Fraction, bool]:
    if any(c in text for c in ".eE"):
        return Fraction(Decimal(text)), True
    return Fraction(int(text)), False


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "op") and t.text == text

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected '{text}'")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "id":
            self.fail("expected an identifier")
        return self.advance()

    def fail(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"{msg}, found {found}", t.span)

    # -- declarations -------------------------------------------------------

    def program(self) -> Program:
        consts, nodes, dirs = [], [], []
        while self.tok.kind != "eof":
            if self.at("const"):
                consts.extend(self.const_decls())
            elif self.at("node") or self.at("function"):
                nodes.append(self.node())
            elif self.tok.kind == "dir":
                dirs.append(self.directive())
            else:
                self.fail("expected 'const' or 'node'")
        return Program(tuple(consts), tuple(nodes), tuple(dirs))

    def const_decls(self) -> List[ConstDecl]:
        self.expect("const")
        out = []
        while self.tok.kind == "id":
            t = self.advance()
            sort = self.sort() if self.accept(":") else None
            self.expect("=")
            out.append(ConstDecl(t.text, sort, self.expr(), t.span))
            self.expect(";")
        if not out:
            self.fail("expected a constant name")
        return out

    def sort(self) -> str:
        for s in ("bool", "int", "real"):
            if self.accept(s):
                return s
        self.fail("expected a type")

    def params(self, closer: str) -> List[Param]:
        out: List[Param] = []
        while not self.at(closer):
            group = [self.ident()]
            while self.accept(","):
                group.append(self.ident())
            self.expect(":")
            sort = self.sort()
            out.extend(Param(t.text, sort, t.span) for t in group)
            if not self.accept(";"):
                break
        return out

    def directive(self) -> Directive:
        t = self.advance()
        names = [self.ident().text]
        while self.accept(","):
            names.append(self.ident().text)
        self.expect(";")
        if t.text == "PROPERTY" and len(names) != 1:
            raise ParseError("PROPERTY names exactly one stream", t.span)
        return Directive(t.text, tuple(names), t.span)

    def node(self) -> Node:
        self.advance()
        name = self.ident()
        self.expect("(")
        inputs = self.params(")")
        self.expect(")")
        self.expect("returns")
        self.expect("(")
        outputs = self.params(")")
        self.expect(")")
        self.accept(";")
        dirs = []
        locs: List[Param] = []
        while True:
            if self.tok.kind == "dir":
                dirs.append(self.directive())
            elif self.accept("var"):
                while self.tok.kind == "id":
                    group = [self.ident()]
                    while self.accept(","):
                        group.append(self.ident())
                    self.expect(":")
                    sort = self.sort()
                    self.expect(";")
                    locs.extend(Param(t.text, sort, t.span) for t in group)
            else:
                break
        self.expect("let")
        eqs, asserts = [], []
        while not self.at("tel"):
            if self.tok.kind == "dir":
                dirs.append(self.directive())
            elif self.at("assert"):
                t = self.advance()
                asserts.append(Assertion(self.expr(), t.span))
                self.expect(";")
            elif self.tok.kind == "id":
                t = self.advance()
                self.expect("=")
                eqs.append(Equation(t.text, self.expr(), t.span))
                self.expect(";")
            else:
                self.fail("expected an equation, 'assert' or 'tel'")
        self.expect("tel")
        self.accept(";")
        return Node(name.text, tuple(inputs), tuple(outputs), tuple(locs),
                    tuple(eqs), tuple(asserts), tuple(dirs), name.span)

    # -- expressions ----------------------------------------------------------

    def expr(self):
        if self.at("if"):
            t = self.advance()
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            b = self.expr()
            return IfThenElse(c, a, b, t.span)
        return self.arrow()

    def arrow(self):
        lhs = self.implies()
        if self.at("->"):
            t = self.advance()
            return Arrow(lhs, self.arrow_rhs(), t.span)
        return lhs

    def arrow_rhs(self):
        return self.expr() if self.at("if") else self.arrow()

    def implies(self):
        lhs = self.disjunction()
        if self.at("=>"):
            t = self.advance()
            rhs = self.expr() if self.at("if") else self.implies()
            return Binary("=>", lhs, rhs, t.span)
        return lhs

    def disjunction(self):
        lhs = self.conjunction()
        while self.at("or") or self.at("xor"):
            t = self.advance()
            lhs = Binary(t.text, lhs, self.conjunction(), t.span)
        return lhs

    def conjunction(self):
        lhs = self.comparison()
        while self.at("and"):
            t = self.advance()
            lhs = Binary("and", lhs, self.comparison(), t.span)
        return lhs

    def comparison(self):
        lhs = self.additive()
        for op in ("<=", ">=", "<>", "<", ">", "="):
            if self.at(op):
                t = self.advance()
                rhs = self.additive()
                if any(self.at(o) for o in ("<=", ">=", "<>", "<", ">", "=")):
                    self.fail("comparisons do not associate")
                return Binary(op, lhs, rhs, t.span)
        return lhs

    def additive(self):
        lhs = self.multiplicative()
        while self.at("+") or self.at("-"):
            t = self.advance()
            lhs = Binary(t.text, lhs, self.multiplicative(), t.span)
        return lhs

    def multiplicative(self):
        lhs = self.unary()
        while any(self.at(o) for o in ("*", "/", "div", "mod")):
            t = self.advance()
            lhs = Binary(t.text, lhs, self.unary(), t.span)
        return lhs

    def unary(self):
        t = self.tok
        if self.accept("-"):
            return Unary("-", self.unary(), t.span)
        if self.accept("not"):
            return Unary("not", self.unary(), t.span)
        if self.accept("pre"):
            return Pre(self.unary(), t.span)
        if self.at("if"):
            return self.expr()
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            value, is_real = parse_number(t.text)
            return Num(value, is_real, t.span)
        if self.accept("true"):
            return BoolLit(True, t.span)
        if self.accept("false"):
            return BoolLit(False, t.span)
        if t.kind == "id":
            self.advance()
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return Call(t.text, tuple(args), t.span)
            return Ident(t.text, t.span)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected an expression")


def parse_program(text: str) -> Program:
    return _Parser(tokenize(text)).program()


def parse_expr(text: str):
    p = _Parser(tokenize(text))
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail("trailing input")
    return e
