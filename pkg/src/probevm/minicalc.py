"""minicalc: newline-separated float expressions.

Exists to prove the tools are language-agnostic: every nonempty line is one
expression that doubles as a statement, its value is printed, and the whole
program is one root. All values are floats.
"""

from __future__ import annotations

import re
from typing import Optional

from .nodes import (
    AstNode, EXPRESSION, Frame, ROOT, RootNode, STATEMENT,
)
from .source import Source, SourceSection
from .spi import LanguageFrontend
from .values import GuestException, NULL, RUNTIME, SYNTAX

LANGUAGE_ID = "minicalc"

_TOKEN_RE = re.compile(r"(?P<num>\d+(?:\.\d+)?)|(?P<op>[-+*/()])")


class CalcNode(AstNode):
    language_id = LANGUAGE_ID


class NumberNode(CalcNode):
    kind = "number"

    def __init__(self, value: float, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.value = value

    def execute(self, frame):
        return self.value


class BinOpNode(CalcNode):
    kind = "binop"

    def __init__(self, op: str, left, right, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.op = op
        self.adopt_children([left, right])

    def execute(self, frame):
        l = self.eval_input(0, frame)
        r = self.eval_input(1, frame)
        if self.op == "+":
            return l + r
        if self.op == "-":
            return l - r
        if self.op == "*":
            return l * r
        if r == 0.0:
            raise GuestException(RUNTIME, "division by zero",
                                 location=self.source_section, language_id=LANGUAGE_ID)
        return l / r


class NegNode(CalcNode):
    kind = "neg"

    def __init__(self, child, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.adopt_children([child])

    def execute(self, frame):
        return -self.eval_input(0, frame)


class LineNode(CalcNode):
    """One program line: a statement that evaluates and prints its expression."""

    kind = "line"

    def __init__(self, child, section):
        super().__init__(section, frozenset({STATEMENT, EXPRESSION}))
        self.adopt_children([child])

    def execute(self, frame):
        engine = self.root.engine
        stack = engine.call_stack
        if stack:
            stack[-1].current_section = self.source_section
        engine.safepoint_poll()
        value = self.eval_input(0, frame)
        engine.write_output(f"{value!r}\n")
        return value


class ProgramNode(CalcNode):
    kind = "program"

    def execute(self, frame):
        result = NULL
        for i in range(len(self.children)):
            result = self.children[i].execute(frame)
        return result


class _LineParser:
    def __init__(self, source: Source, line_start: int, text: str):
        self.source = source
        self.base = line_start
        self.text = text
        self.pos = 0

    def error(self, message: str) -> GuestException:
        at = min(self.base + self.pos, len(self.source.text))
        length = 1 if at < len(self.source.text) else 0
        return GuestException(SYNTAX, message, location=self.source.section(at, length),
                              language_id=LANGUAGE_ID)

    def next_token(self) -> Optional[tuple[str, str, int, int]]:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1
        if self.pos >= len(self.text):
            return None
        m = _TOKEN_RE.match(self.text, self.pos)
        if m is None:
            raise self.error(f"unexpected character {self.text[self.pos]!r}")
        self.pos = m.end()
        kind = "num" if m.group("num") else m.group("op")
        return kind, m.group(), self.base + m.start(), self.base + m.end()

    def __iter__(self):
        while True:
            tok = self.next_token()
            if tok is None:
                return
            yield tok


def _parse_line(source: Source, line_start: int, text: str) -> CalcNode:
    tokens = list(_LineParser(source, line_start, text))
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def err(message):
        at = tokens[pos - 1][3] if pos > 0 else line_start
        return GuestException(SYNTAX, message,
                              location=source.section(min(at, len(source.text)), 0),
                              language_id=LANGUAGE_ID)

    def expr():
        node = term()
        while peek() and peek()[0] in "+-":
            op = take()
            right = term()
            node = BinOpNode(op[0], node, right,
                             _span(source, node, right))
        return node

    def term():
        node = unary()
        while peek() and peek()[0] in "*/":
            op = take()
            right = unary()
            node = BinOpNode(op[0], node, right, _span(source, node, right))
        return node

    def unary():
        tok = peek()
        if tok and tok[0] == "-":
            take()
            operand = unary()
            sec = source.section(tok[2], operand.source_section.char_end - tok[2])
            return NegNode(operand, sec)
        return primary()

    def primary():
        tok = peek()
        if tok is None:
            raise err("unexpected end of line")
        take()
        if tok[0] == "num":
            return NumberNode(float(tok[1]), source.section(tok[2], tok[3] - tok[2]))
        if tok[0] == "(":
            node = expr()
            close = peek()
            if close is None or close[0] != ")":
                raise err("expected ')'")
            take()
            return node
        raise err(f"unexpected {tok[1]!r}")

    node = expr()
    if peek() is not None:
        raise err(f"unexpected {peek()[1]!r}")
    return node


def _span(source: Source, left: CalcNode, right: CalcNode) -> SourceSection:
    start = left.source_section.char_start
    end = right.source_section.char_end
    return source.section(start, end - start)


class MiniCalcFrontend(LanguageFrontend):
    language_id = LANGUAGE_ID
    builtins: dict = {}

    def parse(self, source: Source, engine) -> list[RootNode]:
        lines = []
        offset = 0
        for raw in source.text.split("\n"):
            stripped = raw.strip()
            if stripped and not stripped.startswith("#"):
                expr = _parse_line(source, offset, raw)
                lead = len(raw) - len(raw.lstrip())
                section = source.section(offset + lead, len(raw.rstrip()) - lead)
                lines.append(LineNode(expr, section))
            offset += len(raw) + 1
        whole = source.section(0, len(source.text))
        body = ProgramNode(whole, frozenset({ROOT}))
        body.adopt_children(lines)
        root = RootNode("program", LANGUAGE_ID, body, whole, [])
        root.lexical_parent = None
        root.param_count = 0
        return [root]

    def bind_arguments(self, root: RootNode, frame: Frame, arguments: list):
        pass  # the program takes no arguments

    def to_display_string(self, value) -> str:
        if value is NULL:
            return "null"
        if type(value) is float:
            return repr(value)
        return repr(value)

    def parse_inline(self, text: str, node: AstNode, frame: Optional[Frame]) -> AstNode:
        inline = Source(f"<inline:{text[:30]}>", LANGUAGE_ID, text, internal=True)
        fragment = _parse_line(inline, 0, text)

        class _Anchor:
            engine = node.root.engine if node.root is not None else None
            language_id = LANGUAGE_ID
            name = "<inline>"

            @staticmethod
            def invalidate_shape():
                pass  # fragments are never probed

        def set_root(n):
            n.root = _Anchor
            for c in n.children:
                set_root(c)
        set_root(fragment)
        return fragment

    def declare_expression_inputs(self, node: AstNode) -> list[int]:
        if isinstance(node, BinOpNode):
            return [0, 1]
        if isinstance(node, (NegNode, LineNode)):
            return [0]
        return []

    def wrap_exception(self, raw: Exception, node: Optional[AstNode] = None) -> GuestException:
        if isinstance(raw, GuestException):
            return raw
        from .values import INTERNAL
        return GuestException(INTERNAL, f"{type(raw).__name__}: {raw}",
                              location=node.source_section if node is not None else None,
                              language_id=LANGUAGE_ID)
