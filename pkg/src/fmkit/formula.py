"""Propositional formula AST over feature names, with a small expression parser.

The textual operator syntax (``!``, ``&``, ``|``, ``=>``, ``<=>``) is shared by
the UVL constraint section, the CLI, and the edit-operation wire format.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Formula:
    def variables(self) -> set[str]:
        return set(_iter_vars(self))

    def evaluate(self, assignment: Mapping[str, bool]) -> bool:
        return _evaluate(self, assignment)

    def to_text(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    operands: tuple[Formula, ...]

    def __post_init__(self):
        if len(self.operands) < 2:
            raise FormulaError("And requires at least 2 operands")


@dataclass(frozen=True)
class Or(Formula):
    operands: tuple[Formula, ...]

    def __post_init__(self):
        if len(self.operands) < 2:
            raise FormulaError("Or requires at least 2 operands")


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


def _iter_vars(f: Formula) -> Iterator[str]:
    if isinstance(f, Var):
        yield f.name
    elif isinstance(f, Not):
        yield from _iter_vars(f.operand)
    elif isinstance(f, (And, Or)):
        for op in f.operands:
            yield from _iter_vars(op)
    elif isinstance(f, (Implies, Iff)):
        yield from _iter_vars(f.left)
        yield from _iter_vars(f.right)
    else:
        raise FormulaError(f"unknown formula node: {f!r}")


def _evaluate(f: Formula, a: Mapping[str, bool]) -> bool:
    if isinstance(f, Var):
        return bool(a[f.name])
    if isinstance(f, Not):
        return not _evaluate(f.operand, a)
    if isinstance(f, And):
        return all(_evaluate(op, a) for op in f.operands)
    if isinstance(f, Or):
        return any(_evaluate(op, a) for op in f.operands)
    if isinstance(f, Implies):
        return (not _evaluate(f.left, a)) or _evaluate(f.right, a)
    if isinstance(f, Iff):
        return _evaluate(f.left, a) == _evaluate(f.right, a)
    raise FormulaError(f"unknown formula node: {f!r}")


# Rendering: precedence ! > & > | > => > <=>, "=>" and "<=>" right-associative.
_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Var: 6}

_BARE_OK = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"
)

_KEYWORDS = frozenset({"features", "constraints", "mandatory", "optional", "or", "alternative"})


def render_name(name: str) -> str:
    """Render a feature name, quoting it when it is not a bare word."""
    if name and all(c in _BARE_OK for c in name) and not name[0].isdigit() and name not in _KEYWORDS:
        return name
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def render(f: Formula, parent_prec: int = 0) -> str:
    prec = _PREC[type(f)]
    if isinstance(f, Var):
        text = render_name(f.name)
    elif isinstance(f, Not):
        text = "!" + render(f.operand, prec)
    elif isinstance(f, And):
        text = " & ".join(render(op, prec) for op in f.operands)
    elif isinstance(f, Or):
        text = " | ".join(render(op, prec) for op in f.operands)
    elif isinstance(f, Implies):
        # right-associative: parenthesize a nested Implies on the left
        text = f"{render(f.left, prec + 1)} => {render(f.right, prec)}"
    elif isinstance(f, Iff):
        text = f"{render(f.left, prec + 1)} <=> {render(f.right, prec)}"
    else:
        raise FormulaError(f"unknown formula node: {f!r}")
    if prec < parent_prec:
        return f"({text})"
    return text


def _flatten(cls, operands):
    flat: list[Formula] = []
    for op in operands:
        if isinstance(op, cls):
            flat.extend(op.operands)
        else:
            flat.append(op)
    return tuple(flat)


def make_and(*operands: Formula) -> Formula:
    flat = _flatten(And, operands)
    return flat[0] if len(flat) == 1 else And(flat)


def make_or(*operands: Formula) -> Formula:
    flat = _flatten(Or, operands)
    return flat[0] if len(flat) == 1 else Or(flat)


def flatten_associative(f: Formula) -> Formula:
    """Normalize nesting of And/Or so structurally equal formulas compare equal."""
    if isinstance(f, Var):
        return f
    if isinstance(f, Not):
        return Not(flatten_associative(f.operand))
    if isinstance(f, And):
        return make_and(*(flatten_associative(op) for op in f.operands))
    if isinstance(f, Or):
        return make_or(*(flatten_associative(op) for op in f.operands))
    if isinstance(f, Implies):
        return Implies(flatten_associative(f.left), flatten_associative(f.right))
    if isinstance(f, Iff):
        return Iff(flatten_associative(f.left), flatten_associative(f.right))
    raise FormulaError(f"unknown formula node: {f!r}")


# --- expression parser ----------------------------------------------------

@dataclass
class Token:
    kind: str  # NAME | OP | LPAREN | RPAREN | END
    text: str
    column: int  # 1-based


def tokenize_expr(text: str, column_offset: int = 0) -> list[Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        col = column_offset + i + 1
        if c in " \t":
            i += 1
        elif c == "(":
            tokens.append(Token("LPAREN", c, col))
            i += 1
        elif c == ")":
            tokens.append(Token("RPAREN", c, col))
            i += 1
        elif c == "!":
            tokens.append(Token("OP", "!", col))
            i += 1
        elif c == "&":
            tokens.append(Token("OP", "&", col))
            i += 1
        elif c == "|":
            tokens.append(Token("OP", "|", col))
            i += 1
        elif text.startswith("<=>", i):
            tokens.append(Token("OP", "<=>", col))
            i += 3
        elif text.startswith("=>", i):
            tokens.append(Token("OP", "=>", col))
            i += 2
        elif c == '"':
            j = i + 1
            parts = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    parts.append(text[j + 1])
                    j += 2
                else:
                    parts.append(text[j])
                    j += 1
            if j >= n:
                raise FormulaError(f"unterminated quoted name at column {col}")
            tokens.append(Token("NAME", "".join(parts), col))
            i = j + 1
        elif c in _BARE_OK:
            j = i
            while j < n and text[j] in _BARE_OK:
                j += 1
            tokens.append(Token("NAME", text[i:j], col))
            i = j
        else:
            raise FormulaError(f"unexpected character {c!r} at column {col}")
    tokens.append(Token("END", "", column_offset + n + 1))
    return tokens


class _ExprParser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        f = self.parse_iff()
        tok = self.peek()
        if tok.kind != "END":
            raise FormulaError(f"unexpected {tok.text!r} at column {tok.column}")
        return f

    def parse_iff(self) -> Formula:
        left = self.parse_implies()
        if self.peek().kind == "OP" and self.peek().text == "<=>":
            self.take()
            return Iff(left, self.parse_iff())
        return left

    def parse_implies(self) -> Formula:
        left = self.parse_or()
        if self.peek().kind == "OP" and self.peek().text == "=>":
            self.take()
            return Implies(left, self.parse_implies())
        return left

    def parse_or(self) -> Formula:
        operands = [self.parse_and()]
        while self.peek().kind == "OP" and self.peek().text == "|":
            self.take()
            operands.append(self.parse_and())
        return make_or(*operands) if len(operands) > 1 else operands[0]

    def parse_and(self) -> Formula:
        operands = [self.parse_unary()]
        while self.peek().kind == "OP" and self.peek().text == "&":
            self.take()
            operands.append(self.parse_unary())
        return make_and(*operands) if len(operands) > 1 else operands[0]

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "!":
            self.take()
            return Not(self.parse_unary())
        if tok.kind == "LPAREN":
            self.take()
            f = self.parse_iff()
            closing = self.take()
            if closing.kind != "RPAREN":
                raise FormulaError(f"expected ')' at column {closing.column}")
            return f
        if tok.kind == "NAME":
            self.take()
            return Var(tok.text)
        raise FormulaError(f"expected expression at column {tok.column}")


def parse_expr(text: str, column_offset: int = 0) -> Formula:
    """Parse a constraint expression. Raises FormulaError on syntax errors."""
    return _ExprParser(tokenize_expr(text, column_offset)).parse()
