"""Function-definition files.

One block per function or sequence; items are separated by ``;`` or a
newline, ``#`` starts a comment::

    fn f on (0, +inf):
        piece (0, 1]: x
        family n >= 1 on (n, n+1]: x + n | x - n  glue 1/n  init 0
        at 1: 5

    seq h = 1/n
    seq t:
        1  0.5
        2  0.25

``piece (l, r]: body`` covers one cell.  ``family n >= K on (p(n), p(n+1)]``
lists bodies used on cell n by ``n mod count``; ``glue`` is the jump at p(n)
and ``init`` the offset of the first family cell.  ``at q: v`` overrides the
value at a breakpoint.  A block that is a single bare expression is one
piece over the whole domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from regcalc.expr import (
    Add,
    ExprError,
    ExprSyntaxError,
    Num,
    Token,
    TokenStream,
    Var,
    compile_expr,
    describe,
    evaluate,
    parse_expr,
    substitute,
    tokenize,
    uses,
)
from regcalc.lhospital import Seq
from regcalc.regulated import Family, Piece, PiecewiseFn, RegulatedError

RESERVED = {"fn", "seq", "on", "piece", "family", "at", "glue", "init", "x", "n", "inf", "pi", "e"}
P_CHECK = 20  # the right end of a family cell is compared with p(n+1) for this many n


class FnFileError(ValueError):
    def __init__(self, message: str, offset: int, source: str = "", expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = expected
        prefix = source.encode("utf-8")[:offset].decode("utf-8", "replace")
        self.line = prefix.count("\n") + 1
        self.column = len(prefix) - (prefix.rfind("\n") + 1) + 1
        detail = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"line {self.line}, column {self.column}: {message}{detail}")


@dataclass
class FnFile:
    functions: dict[str, PiecewiseFn] = field(default_factory=dict)
    sequences: dict[str, Seq] = field(default_factory=dict)

    def function(self, name: str) -> PiecewiseFn:
        if name not in self.functions:
            known = ", ".join(sorted(self.functions)) or "none"
            raise KeyError(f"no function {name!r} in the file (defined: {known})")
        return self.functions[name]


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.ts = TokenStream(tokenize(source, keep_newlines=True))

    # helpers -------------------------------------------------------------
    def error(self, message: str, tok: Token | None = None, expected=()) -> FnFileError:
        tok = tok or self.ts.peek
        return FnFileError(message, tok.offset, self.source, tuple(expected))

    def expect(self, *texts: str) -> Token:
        tok = self.ts.peek
        if tok.kind in ("op", "ident") and tok.text in texts:
            return self.ts.next()
        raise self.error(f"unexpected {describe(tok)}", tok, texts)

    def skip_newlines(self) -> None:
        while self.ts.peek.kind == "nl":
            self.ts.next()

    def name(self) -> str:
        tok = self.ts.peek
        if tok.kind != "ident" or tok.text in RESERVED:
            raise self.error(f"expected a name, got {describe(tok)}", tok)
        self.ts.next()
        return tok.text

    def expr(self):
        try:
            return parse_expr(self.ts)
        except ExprSyntaxError as exc:
            raise FnFileError(str(exc).split(" at offset")[0], exc.offset, self.source, exc.expected) from None

    def constant(self) -> float:
        """A constant expression, or inf / +inf / -inf."""
        tok = self.ts.peek
        sign = 1.0
        if self.ts.at("+", "-") and self.ts.tokens[self.ts.pos + 1].text == "inf":
            sign = -1.0 if self.ts.next().text == "-" else 1.0
        if self.ts.at("inf"):
            self.ts.next()
            return sign * math.inf
        e = self.expr()
        if uses(e, "x") or uses(e, "n"):
            raise self.error("expected a constant", tok)
        try:
            return float(evaluate(e))
        except ExprError as exc:
            raise self.error(str(exc), tok) from None

    # grammar -------------------------------------------------------------
    def parse(self) -> FnFile:
        out = FnFile()
        self.skip_newlines()
        while self.ts.peek.kind != "eof":
            tok = self.ts.peek
            if self.ts.at("fn"):
                name, fn = self.function()
                target = out.functions
            elif self.ts.at("seq"):
                name, fn = self.sequence()
                target = out.sequences
            else:
                raise self.error(f"unexpected {describe(tok)}", tok, ("fn", "seq"))
            if name in out.functions or name in out.sequences:
                raise self.error(f"{name!r} is defined twice", tok)
            target[name] = fn
            self.skip_newlines()
        return out

    def _item_end(self) -> bool:
        return self.ts.peek.kind in ("nl", "eof") or self.ts.at(";")

    def function(self) -> tuple[str, PiecewiseFn]:
        start = self.expect("fn")
        name = self.name()
        self.expect("on")
        self.expect("(")
        a = self.constant()
        self.expect(",")
        b = self.constant()
        self.expect(")")
        self.expect(":")
        pieces: list[Piece] = []
        family = None
        points: dict[float, float] = {}
        bare = []
        while True:
            while self.ts.peek.kind == "nl" or self.ts.at(";"):
                self.ts.next()
            if self.ts.peek.kind == "eof" or self.ts.at("fn", "seq"):
                break
            tok = self.ts.peek
            if self.ts.at("piece"):
                pieces.append(self.piece())
            elif self.ts.at("family"):
                if family is not None:
                    raise self.error("only one family per function", tok)
                family = self.family()
            elif self.ts.at("at"):
                self.ts.next()
                q = self.constant()
                self.expect(":")
                points[q] = self.constant()
            else:
                bare.append((tok, self.expr()))
            if not self._item_end():
                raise self.error(f"unexpected {describe(self.ts.peek)}", None, (";", "end of line"))
        if bare:
            if pieces or family is not None or len(bare) > 1:
                raise self.error("a bare body must be the only item of its block", bare[-1][0])
            pieces = [Piece(a, b, bare[0][1])]
        if not pieces and family is None:
            raise self.error(f"{name} has no pieces", start)
        try:
            fn = PiecewiseFn(a, b, pieces, family, points, name=name)
        except (RegulatedError, ExprError, ArithmeticError) as exc:
            raise self.error(str(exc), start) from None
        return name, fn

    def piece(self) -> Piece:
        self.expect("piece")
        self.expect("(")
        left = self.constant()
        self.expect(",")
        right = self.constant()
        self.expect("]", ")")
        self.expect(":")
        tok = self.ts.peek
        body = self.expr()
        if uses(body, "n"):
            raise self.error("a piece body cannot use n", tok)
        return Piece(left, right, body)

    def family(self) -> Family:
        head = self.expect("family")
        self.expect("n")
        self.expect(">=")
        tok = self.ts.peek
        start = self.constant()
        if start != int(start):
            raise self.error("the family start must be an integer", tok)
        start = int(start)
        self.expect("on")
        self.expect("(")
        p = self.expr()
        self.expect(",")
        q = self.expr()
        self.expect("]", ")")
        self.expect(":")
        bodies = [self.expr()]
        while self.ts.at("|"):
            self.ts.next()
            bodies.append(self.expr())
        glue = init = None
        while self.ts.at("glue", "init"):
            key = self.ts.next().text
            if key == "glue":
                glue = self.expr()
            else:
                init = self.constant()
        if uses(p, "x") or uses(q, "x"):
            raise self.error("family breakpoints depend on n only", head)
        # (p(n), q(n)] must tile: q(n) = p(n+1)
        qn = compile_expr(q)
        shifted = compile_expr(substitute(p, n=Add(Var("n"), Num(1.0))))
        for n in range(start, start + P_CHECK):
            try:
                right, nxt = qn(0.0, n), shifted(0.0, n)
            except ExprError as exc:
                raise self.error(f"family breakpoints: {exc}", head) from None
            if abs(right - nxt) > 1e-12 * max(1.0, abs(right)):
                raise self.error(f"family cell {n} ends at {right!r} but cell {n + 1} starts at {nxt!r}", head)
        return Family(start, p, tuple(bodies), glue=glue, init=init)

    def sequence(self) -> tuple[str, Seq]:
        self.expect("seq")
        name = self.name()
        if self.ts.at("="):
            self.ts.next()
            tok = self.ts.peek
            e = self.expr()
            if uses(e, "x"):
                raise self.error("a sequence is an expression in n", tok)
            seq = Seq.from_expr(e, name)
            seq.name = name
            return name, seq
        self.expect(":")
        table: dict[int, float] = {}
        while True:
            self.skip_newlines()
            tok = self.ts.peek
            if tok.kind != "num":
                break
            idx = float(self.ts.next().text)
            if idx != int(idx) or idx < 1:
                raise self.error("a table index is an integer >= 1", tok)
            if int(idx) in table:
                raise self.error(f"index {int(idx)} appears twice", tok)
            table[int(idx)] = self.constant()
            if not self._item_end():
                raise self.error(f"unexpected {describe(self.ts.peek)}", None, ("end of line",))
        if not table:
            raise self.error(f"sequence {name} has no rows")
        try:
            return name, Seq.from_table(table, name)
        except ValueError as exc:
            raise self.error(str(exc)) from None


def parse_text(source: str) -> FnFile:
    return _Parser(source).parse()


def load(path: str | Path) -> FnFile:
    return parse_text(Path(path).read_text(encoding="utf-8"))
