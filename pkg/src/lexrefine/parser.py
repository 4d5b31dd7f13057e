"""Recursive-descent parser for the model language.

::

    letting T be new type of size 4        $ comments run to end of line
    find x : set (size 3) of set (size 2) of T
    bibd 4 4 3 high                         $ built-in BIBD family

Type expressions mirror how :mod:`lexrefine.types` prints them, so
``print_model(parse_model(text))`` is a fixed point after one round.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DuplicateName, ModelSyntaxError, UnknownTag
from .refinery import AbstractModel, bibd_model
from .types import (
    BoolT, FunctionT, IntT, MatrixT, MSetT, PartitionT, RelationT, SequenceT,
    SetT, Size, TupleT, UnnamedT,
)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\$[^\n]*)
  | (?P<arrow>-->) | (?P<dots>\.\.)
  | (?P<int>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\],:*])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    out = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.model = AbstractModel()

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ModelSyntaxError(f"{msg}, found {found}", tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, *words: str) -> None:
        for w in words:
            if not self.accept(w):
                self.error(f"expected {w!r}")

    def number(self) -> int:
        if self.tok.kind != "int":
            self.error("expected an integer")
        self.i += 1
        return int(self.toks[self.i - 1].text)

    def positive(self) -> int:
        tok = self.tok
        n = self.number()
        if n < 1:
            self.error("expected a positive integer", tok)
        return n

    def name(self) -> Token:
        if self.tok.kind != "name":
            self.error("expected a name")
        self.i += 1
        return self.toks[self.i - 1]

    # -- statements ---------------------------------------------------------

    def parse(self) -> AbstractModel:
        while self.tok.kind != "eof":
            if self.accept("letting"):
                self.letting()
            elif self.accept("find"):
                self.find()
            elif self.accept("bibd"):
                self.bibd()
            else:
                self.error("expected 'letting', 'find' or 'bibd'")
        return self.model

    def letting(self):
        tok = self.name()
        self.expect("be", "new", "type", "of", "size")
        n = self.positive()
        self._declare(lambda: self.model.add_unnamed(tok.text, n), tok)

    def find(self):
        tok = self.name()
        self.expect(":")
        t = self.type_expr()
        self._declare(lambda: self.model.add_variable(tok.text, t), tok)

    def bibd(self):
        start = self.tok
        if self.model.unnamed or self.model.variables:
            self.error("a bibd directive must be the only statement", start)
        v, b, k = self.positive(), self.positive(), self.positive()
        form = self.name()
        if form.text not in ("high", "low", "matrix"):
            self.error("expected 'high', 'low' or 'matrix'", form)
        if k > v:
            self.error("block size exceeds the number of objects", form)
        self.model = bibd_model(v, b, k, form.text)
        if self.tok.kind != "eof":
            self.error("a bibd directive must be the only statement")

    def _declare(self, action, tok):
        if self.model.family:
            self.error("a bibd directive must be the only statement", tok)
        try:
            action()
        except (DuplicateName, UnknownTag) as e:
            raise type(e)(f"line {tok.line}, column {tok.col}: {e}") from None

    # -- types --------------------------------------------------------------

    def type_expr(self):
        tok = self.tok
        if self.accept("bool"):
            return BoolT()
        if self.accept("int"):
            self.expect("(")
            lo = self.number()
            self.expect("..")
            hi = self.number()
            self.expect(")")
            if lo > hi:
                self.error("empty integer range", tok)
            return IntT(lo, hi)
        if self.accept("tuple"):
            self.expect("(")
            parts = [self.type_expr()]
            while self.accept(","):
                parts.append(self.type_expr())
            self.expect(")")
            return TupleT(tuple(parts))
        if self.accept("matrix"):
            self.expect("indexed", "by", "[")
            index = [self.index_type()]
            while self.accept(","):
                index.append(self.index_type())
            self.expect("]", "of")
            return MatrixT(tuple(index), self.type_expr())
        if self.accept("set"):
            size = self.size_attr(optional=True)
            self.expect("of")
            return SetT(size, self.type_expr())
        if self.accept("mset"):
            self.expect("(")
            size = self.size_value()
            occ = None
            if self.accept(","):
                self.expect("maxOcc")
                occ = self.positive()
            self.expect(")", "of")
            return MSetT(size, self.type_expr(), occ)
        if self.accept("function"):
            total = False
            if self.accept("("):
                self.expect("total", ")")
                total = True
            frm = self.type_expr()
            self.expect("-->")
            return FunctionT(frm, self.type_expr(), total)
        if self.accept("relation"):
            self.expect("of", "(")
            parts = [self.type_expr()]
            while self.accept("*"):
                parts.append(self.type_expr())
            self.expect(")")
            return RelationT(tuple(parts))
        if self.accept("partition"):
            parts = None
            if self.accept("("):
                if self.accept("numParts"):
                    parts = Size(self.positive())
                elif self.accept("maxNumParts"):
                    parts = Size(self.positive(), False)
                else:
                    self.error("expected 'numParts' or 'maxNumParts'")
                self.expect(")")
            self.expect("from")
            frm = self.index_type()
            return PartitionT(frm, parts)
        if self.accept("sequence"):
            self.expect("(", "maxLen")
            n = self.number()
            if n < 0:
                self.error("expected a length", tok)
            self.expect(")", "of")
            return SequenceT(n, self.type_expr())
        if tok.kind == "name":
            return self.unnamed()
        self.error("expected a type")

    def unnamed(self) -> UnnamedT:
        tok = self.name()
        if tok.text not in self.model.unnamed:
            raise UnknownTag(f"line {tok.line}, column {tok.col}: "
                             f"unnamed type {tok.text} is not declared")
        return UnnamedT(tok.text, self.model.unnamed[tok.text])

    def index_type(self):
        tok = self.tok
        t = self.type_expr()
        if not isinstance(t, (BoolT, IntT, UnnamedT)):
            self.error("expected an enumerable index type", tok)
        return t

    def size_value(self) -> Size:
        if self.accept("size"):
            return Size(self.number())
        if self.accept("maxSize"):
            return Size(self.number(), False)
        self.error("expected 'size' or 'maxSize'")

    def size_attr(self, optional: bool):
        if optional and not self.at("("):
            return None
        self.expect("(")
        size = self.size_value()
        self.expect(")")
        return size


def parse_model(text: str) -> AbstractModel:
    return _Parser(text).parse()


def parse_type(text: str, unnamed: dict = None):
    """Parse one type expression, with ``unnamed`` giving tag sizes."""
    p = _Parser(text)
    p.model.unnamed.update(unnamed or {})
    t = p.type_expr()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return t


def print_model(model: AbstractModel) -> str:
    """Canonical text of a model."""
    if model.family:
        _, v, b, k, form = model.family
        return f"bibd {v} {b} {k} {form}\n"
    lines = [f"letting {tag} be new type of size {n}" for tag, n in model.unnamed.items()]
    lines += [f"find {name} : {t}" for name, t in model.variables]
    return "\n".join(lines) + "\n"
