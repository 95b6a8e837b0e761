"""toylang: a small dynamically typed language with functions and closures.

Grammar, tagging table, and display conventions are documented in
docs/toylang.md. Arithmetic and comparison nodes self-specialize: they start
uninitialized, replace themselves with an int or float variant on first
execution, and fall back to a generic variant when a type guard fails.
"""

from __future__ import annotations

import re
import time
from typing import Optional

from .nodes import (
    AstNode, CALL, ControlFlowSignal, EXPRESSION, Frame, GENERIC, ROOT,
    RootNode, SPECIALIZED, STATEMENT, SlotDescriptor,
)
from .source import Source, SourceSection
from .spi import LanguageFrontend
from .values import (
    Builtin, Closure, EXIT, GuestException, NULL, RUNTIME, SYNTAX, UNDEFINED,
)

LANGUAGE_ID = "toylang"

KEYWORDS = {"def", "if", "else", "while", "return", "true", "false", "null",
            "and", "or", "not"}

_TOKEN_RE = re.compile(r"""
  (?P<ws>[\ \t]+)
| (?P<comment>\#[^\n]*)
| (?P<newline>\n)
| (?P<float>\d+\.\d+)
| (?P<int>\d+)
| (?P<string>"(?:[^"\\\n]|\\.)*")
| (?P<name>[A-Za-z_][A-Za-z0-9_]*)
| (?P<op>==|!=|<=|>=|[+\-*/%<>=(){},;])
""", re.VERBOSE)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class Token:
    __slots__ = ("kind", "text", "start", "end")

    def __init__(self, kind: str, text: str, start: int, end: int):
        self.kind = kind
        self.text = text
        self.start = start
        self.end = end

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r})"


def _syntax_error(source: Source, start: int, message: str) -> GuestException:
    end = min(start + 1, len(source.text))
    return GuestException(SYNTAX, message,
                          location=source.section(start, end - start),
                          language_id=source.language_id)


def tokenize(source: Source) -> list[Token]:
    text = source.text
    tokens: list[Token] = []
    pos = 0
    depth = 0  # newlines inside parens are not statement separators
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise _syntax_error(source, pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        tok_text = m.group()
        if kind in ("ws", "comment"):
            pass
        elif kind == "newline":
            if depth == 0:
                tokens.append(Token("newline", "\n", pos, pos + 1))
        else:
            if kind == "op":
                if tok_text == "(":
                    depth += 1
                elif tok_text == ")":
                    depth = max(0, depth - 1)
                tokens.append(Token(tok_text, tok_text, pos, m.end()))
            elif kind == "name" and tok_text in KEYWORDS:
                tokens.append(Token(tok_text, tok_text, pos, m.end()))
            else:
                tokens.append(Token(kind, tok_text, pos, m.end()))
        pos = m.end()
    tokens.append(Token("eof", "", len(text), len(text)))
    return tokens


# ---------------------------------------------------------------------------
# nodes


class ToyNode(AstNode):
    language_id = LANGUAGE_ID


class StatementNode(ToyNode):
    """Base for statements: records the current location and polls the
    safepoint before running."""

    def execute(self, frame):
        engine = self.root.engine
        stack = engine.call_stack
        if stack:
            stack[-1].current_section = self.source_section
        engine.safepoint_poll()
        return self.run(frame)

    def run(self, frame):  # pragma: no cover - abstract
        raise NotImplementedError


class BlockNode(ToyNode):
    kind = "block"

    def execute(self, frame):
        result = NULL
        for i in range(len(self.children)):
            result = self.children[i].execute(frame)
        return result


class LiteralNode(ToyNode):
    kind = "literal"

    def __init__(self, value, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.value = value

    def execute(self, frame):
        return self.value


class ReadLocalNode(ToyNode):
    kind = "read"

    def __init__(self, name: str, depth: int, slot_index: int, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.name = name
        self.depth = depth
        self.slot_index = slot_index

    def execute(self, frame):
        value = frame.at_depth(self.depth).read(self.slot_index)
        if value is UNDEFINED:
            raise GuestException(RUNTIME, f"variable '{self.name}' is not defined",
                                 location=self.source_section, language_id=LANGUAGE_ID)
        return value


class ReadUndefinedNode(ToyNode):
    kind = "read"

    def __init__(self, name: str, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.name = name

    def execute(self, frame):
        raise GuestException(RUNTIME, f"variable '{self.name}' is not defined",
                             location=self.source_section, language_id=LANGUAGE_ID)


class BuiltinRefNode(ToyNode):
    kind = "builtin"

    def __init__(self, builtin: Builtin, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.builtin = builtin

    def execute(self, frame):
        return self.builtin


class SpillNode(ToyNode):
    """Synthetic: stores a subexpression's value in an internal temp slot so
    it is inspectable mid-statement. Untagged, so never probed."""

    kind = "spill"

    def __init__(self, child: ToyNode, slot_index: int):
        super().__init__(None, frozenset())
        self.slot_index = slot_index
        self.adopt_children([child])

    def execute(self, frame):
        value = self.children[0].execute(frame)
        frame.write(self.slot_index, value)
        return value


class AssignNode(StatementNode):
    kind = "assign"

    def __init__(self, name: str, depth: int, slot_index: int, child, section):
        super().__init__(section, frozenset({STATEMENT}))
        self.name = name
        self.depth = depth
        self.slot_index = slot_index
        self.adopt_children([child])

    def run(self, frame):
        value = self.children[0].execute(frame)
        frame.at_depth(self.depth).write(self.slot_index, value)
        return NULL


class InlineAssignNode(ToyNode):
    """Assignment fragment used by eval-in-frame; no safepoint, no tags."""

    kind = "assign"

    def __init__(self, name: str, depth: int, slot_index: int, child, section):
        super().__init__(section, frozenset())
        self.name = name
        self.depth = depth
        self.slot_index = slot_index
        self.adopt_children([child])

    def execute(self, frame):
        value = self.children[0].execute(frame)
        frame.at_depth(self.depth).write(self.slot_index, value)
        return value


class ExprStatementNode(StatementNode):
    kind = "expr-stmt"

    def __init__(self, child, section):
        super().__init__(section, frozenset({STATEMENT}))
        self.adopt_children([child])

    def run(self, frame):
        return self.children[0].execute(frame)


class IfNode(StatementNode):
    kind = "if"

    def __init__(self, cond, then_block, else_block, section):
        super().__init__(section, frozenset({STATEMENT}))
        children = [cond, then_block] + ([else_block] if else_block is not None else [])
        self.adopt_children(children)

    def run(self, frame):
        cond = self.children[0].execute(frame)
        if type(cond) is not bool:
            raise GuestException(RUNTIME, "if condition must be a boolean",
                                 location=self.children[0].source_section,
                                 language_id=LANGUAGE_ID)
        if cond:
            self.children[1].execute(frame)
        elif len(self.children) > 2:
            self.children[2].execute(frame)
        return NULL


class WhileNode(StatementNode):
    kind = "while"

    def __init__(self, cond, body, section):
        super().__init__(section, frozenset({STATEMENT}))
        self.adopt_children([cond, body])

    def run(self, frame):
        engine = self.root.engine
        while True:
            cond = self.children[0].execute(frame)
            if type(cond) is not bool:
                raise GuestException(RUNTIME, "while condition must be a boolean",
                                     location=self.children[0].source_section,
                                     language_id=LANGUAGE_ID)
            if not cond:
                return NULL
            self.children[1].execute(frame)
            engine.safepoint_poll()  # loop back-edge


class ReturnNode(StatementNode):
    kind = "return"

    def __init__(self, child: Optional[ToyNode], section):
        super().__init__(section, frozenset({STATEMENT}))
        self.adopt_children([child] if child is not None else [])

    def run(self, frame):
        value = self.children[0].execute(frame) if self.children else NULL
        raise ControlFlowSignal(value)


class DefNode(ToyNode):
    """Binds a freshly closed-over function into its slot. Untagged."""

    kind = "def"

    def __init__(self, slot_index: int, func_root: RootNode, section):
        super().__init__(section, frozenset())
        self.slot_index = slot_index
        self.func_root = func_root

    def execute(self, frame):
        frame.write(self.slot_index, Closure(self.func_root, frame))
        return NULL


class CallNode(ToyNode):
    kind = "call"

    def __init__(self, callee, args, section):
        super().__init__(section, frozenset({CALL, EXPRESSION}))
        self.adopt_children([callee] + list(args))

    def execute(self, frame):
        callee = self.eval_input(0, frame)
        args = [self.eval_input(i, frame) for i in range(1, len(self.children))]
        return self.root.engine.call(callee, args, self)


# -- binary operators, with specialization ----------------------------------

_NUMERIC_OPS = {"+", "-", "*", "/", "%"}
_COMPARE_OPS = {"<", "<=", ">", ">=", "==", "!="}


def _type_name(v) -> str:
    if type(v) is bool:
        return "bool"
    if type(v) is int:
        return "int"
    if type(v) is float:
        return "float"
    if type(v) is str:
        return "str"
    if v is NULL:
        return "null"
    if isinstance(v, (Closure, Builtin)):
        return "function"
    return "value"


def _generic_binary(op: str, l, r, section):
    err = lambda: GuestException(
        RUNTIME, f"unsupported operands for '{op}': {_type_name(l)} and {_type_name(r)}",
        location=section, language_id=LANGUAGE_ID)
    lt, rt = type(l), type(r)
    num_l = (lt is int or lt is float) and lt is not bool
    num_r = (rt is int or rt is float) and rt is not bool
    if op == "==":
        # equality is typed: values of different types are never equal,
        # including int vs float
        return l == r if lt is rt else False
    if op == "!=":
        return not _generic_binary("==", l, r, section)
    if op == "+" and lt is str and rt is str:
        return l + r
    if op in _NUMERIC_OPS or op in _COMPARE_OPS:
        if not (num_l and num_r):
            raise err()
        return _numeric_binary(op, l, r, section)
    raise err()


def _numeric_binary(op: str, l, r, section):
    if op == "+":
        return l + r
    if op == "-":
        return l - r
    if op == "*":
        return l * r
    if op == "/":
        if r == 0:
            raise GuestException(RUNTIME, "division by zero", location=section,
                                 language_id=LANGUAGE_ID)
        return l / r
    if op == "%":
        if r == 0:
            raise GuestException(RUNTIME, "modulo by zero", location=section,
                                 language_id=LANGUAGE_ID)
        return l % r
    if op == "<":
        return l < r
    if op == "<=":
        return l <= r
    if op == ">":
        return l > r
    if op == ">=":
        return l >= r
    if op == "==":
        return type(l) is type(r) and l == r  # typed equality: 1 != 1.0
    if op == "!=":
        return not (type(l) is type(r) and l == r)
    raise AssertionError(op)


class BinaryNode(ToyNode):
    kind = "binary"

    def __init__(self, op: str, left, right, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.op = op
        self.adopt_children([left, right])

    def _compute(self, l, r):
        raise NotImplementedError


class UninitializedBinaryNode(BinaryNode):
    """First execution picks a typed variant and replaces itself with it."""

    def __init__(self, op, left, right, section):
        super().__init__(op, left, right, section)
        # tier defaults to UNINITIALIZED

    def execute(self, frame):
        l = self.eval_input(0, frame)
        r = self.eval_input(1, frame)
        if type(l) is int and type(r) is int:
            variant = IntBinaryNode(self.op, None, None, self.source_section)
        elif type(l) in (int, float) and type(r) in (int, float) \
                and type(l) is not bool and type(r) is not bool:
            variant = FloatBinaryNode(self.op, None, None, self.source_section)
        else:
            variant = GenericBinaryNode(self.op, None, None, self.source_section)
        # a recursive call through an operand may have rewritten this node
        # already, leaving this invocation holding a detached copy
        if self.parent is not None:
            self.replace(variant)
        return variant._compute(l, r, frame)


class IntBinaryNode(BinaryNode):
    def __init__(self, op, left, right, section):
        if left is None:
            AstNode.__init__(self, section, frozenset({EXPRESSION}))
            self.op = op
        else:
            super().__init__(op, left, right, section)
        self.tier = SPECIALIZED

    def execute(self, frame):
        l = self.eval_input(0, frame)
        r = self.eval_input(1, frame)
        if type(l) is int and type(r) is int:
            return _numeric_binary(self.op, l, r, self.source_section)
        # guard failure: go generic
        variant = GenericBinaryNode(self.op, None, None, self.source_section)
        if self.parent is not None:
            self.replace(variant)
        return variant._compute(l, r, frame)

    def _compute(self, l, r, frame):
        return _numeric_binary(self.op, l, r, self.source_section)


class FloatBinaryNode(BinaryNode):
    def __init__(self, op, left, right, section):
        if left is None:
            AstNode.__init__(self, section, frozenset({EXPRESSION}))
            self.op = op
        else:
            super().__init__(op, left, right, section)
        self.tier = SPECIALIZED

    def execute(self, frame):
        l = self.eval_input(0, frame)
        r = self.eval_input(1, frame)
        if type(l) in (int, float) and type(r) in (int, float) \
                and type(l) is not bool and type(r) is not bool:
            return _numeric_binary(self.op, l, r, self.source_section)
        variant = GenericBinaryNode(self.op, None, None, self.source_section)
        if self.parent is not None:
            self.replace(variant)
        return variant._compute(l, r, frame)

    def _compute(self, l, r, frame):
        return _numeric_binary(self.op, l, r, self.source_section)


class GenericBinaryNode(BinaryNode):
    def __init__(self, op, left, right, section):
        if left is None:
            AstNode.__init__(self, section, frozenset({EXPRESSION}))
            self.op = op
        else:
            super().__init__(op, left, right, section)
        self.tier = GENERIC

    def execute(self, frame):
        l = self.eval_input(0, frame)
        r = self.eval_input(1, frame)
        return self._compute(l, r, frame)

    def _compute(self, l, r, frame):
        return _generic_binary(self.op, l, r, self.source_section)


class ShortCircuitNode(ToyNode):
    kind = "logic"

    def __init__(self, op: str, left, right, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.op = op
        self.adopt_children([left, right])

    def execute(self, frame):
        l = self.eval_input(0, frame)
        if type(l) is not bool:
            raise GuestException(RUNTIME, f"'{self.op}' operands must be booleans",
                                 location=self.source_section, language_id=LANGUAGE_ID)
        if self.op == "and" and not l:
            return False
        if self.op == "or" and l:
            return True
        r = self.eval_input(1, frame)
        if type(r) is not bool:
            raise GuestException(RUNTIME, f"'{self.op}' operands must be booleans",
                                 location=self.source_section, language_id=LANGUAGE_ID)
        return r


class UnaryNode(ToyNode):
    kind = "unary"

    def __init__(self, op: str, child, section):
        super().__init__(section, frozenset({EXPRESSION}))
        self.op = op
        self.adopt_children([child])

    def execute(self, frame):
        v = self.eval_input(0, frame)
        if self.op == "-":
            if type(v) in (int, float) and type(v) is not bool:
                return -v
            raise GuestException(RUNTIME, f"cannot negate {_type_name(v)}",
                                 location=self.source_section, language_id=LANGUAGE_ID)
        if self.op == "not":
            if type(v) is bool:
                return not v
            raise GuestException(RUNTIME, "'not' operand must be a boolean",
                                 location=self.source_section, language_id=LANGUAGE_ID)
        raise AssertionError(self.op)


# ---------------------------------------------------------------------------
# parsing


class _FuncScope:
    """Parse-time lexical scope of one function (flat; no block scoping)."""

    def __init__(self, name: str, parent: Optional["_FuncScope"]):
        self.name = name
        self.parent = parent
        self.slots: list[SlotDescriptor] = []
        self.by_name: dict[str, SlotDescriptor] = {}
        self.temp_count = 0

    def declare(self, name: str, internal: bool = False) -> SlotDescriptor:
        slot = SlotDescriptor(name, internal, len(self.slots))
        self.slots.append(slot)
        self.by_name[name] = slot
        return slot

    def new_temp(self) -> SlotDescriptor:
        slot = self.declare(f"$tmp{self.temp_count}", internal=True)
        self.temp_count += 1
        return slot

    def resolve(self, name: str) -> Optional[tuple[int, SlotDescriptor]]:
        scope, depth = self, 0
        while scope is not None:
            slot = scope.by_name.get(name)
            if slot is not None:
                return depth, slot
            scope = scope.parent
            depth += 1
        return None


class Parser:
    def __init__(self, source: Source, frontend: "ToyLangFrontend"):
        self.source = source
        self.frontend = frontend
        self.tokens = tokenize(source)
        self.pos = 0
        self.collected_roots: list[RootNode] = []
        self.scope: Optional[_FuncScope] = None
        self.lexical_parents: dict[int, Optional[RootNode]] = {}

    # -- token helpers -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def check(self, kind: str) -> bool:
        return self.peek().kind == kind

    def match(self, kind: str) -> Optional[Token]:
        if self.check(kind):
            return self.advance()
        return None

    def expect(self, kind: str, what: str = "") -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise _syntax_error(self.source, tok.start,
                                f"expected {what or kind}, got {tok.text or 'end of input'!r}")
        return self.advance()

    def skip_newlines(self):
        while self.peek().kind in ("newline", ";"):
            self.advance()

    def section(self, start: int, end: int) -> SourceSection:
        return self.source.section(start, end - start)

    # -- entry -------------------------------------------------------------

    def parse_program(self, root_name: str = "main") -> list[RootNode]:
        scope = _FuncScope(root_name, None)
        self.scope = scope
        body_stmts = []
        self.skip_newlines()
        while not self.check("eof"):
            body_stmts.append(self.statement())
            self.skip_newlines()
        whole = self.source.section(0, len(self.source.text))
        body = BlockNode(whole, frozenset({ROOT}))
        body.adopt_children(body_stmts)
        root = RootNode(root_name, LANGUAGE_ID, body, whole, scope.slots)
        root.lexical_parent = None
        root.param_count = 0
        self._patch_nested_parents(root)
        return [root] + self.collected_roots

    def _patch_nested_parents(self, root: RootNode):
        for nested in self.collected_roots:
            if nested.lexical_parent is _PENDING:
                nested.lexical_parent = root

    # -- statements --------------------------------------------------------

    def statement(self) -> ToyNode:
        tok = self.peek()
        if tok.kind == "def":
            return self.def_statement()
        if tok.kind == "if":
            return self.if_statement()
        if tok.kind == "while":
            return self.while_statement()
        if tok.kind == "return":
            return self.return_statement()
        if tok.kind == "name" and self.tokens[self.pos + 1].kind == "=":
            return self.assignment()
        expr = self.expression()
        self.end_of_statement()
        sec = expr.source_section or self.section(tok.start, tok.end)
        return ExprStatementNode(expr, sec)

    def end_of_statement(self):
        tok = self.peek()
        if tok.kind in ("newline", ";", "eof", "}"):
            if tok.kind in ("newline", ";"):
                self.advance()
            return
        raise _syntax_error(self.source, tok.start,
                            f"unexpected {tok.text!r} after statement")

    def assignment(self) -> ToyNode:
        name_tok = self.advance()
        self.expect("=")
        value = self.expression()
        self.end_of_statement()
        end = value.source_section.char_end if value.source_section else name_tok.end
        sec = self.section(name_tok.start, end)
        resolved = self.scope.resolve(name_tok.text)
        if resolved is None:
            slot = self.scope.declare(name_tok.text)
            depth = 0
        else:
            depth, slot = resolved
        return AssignNode(name_tok.text, depth, slot.index, value, sec)

    def if_statement(self) -> ToyNode:
        start = self.advance().start
        cond = self.expression()
        then_block, then_end = self.block()
        else_block = None
        end = then_end
        if self.match("else"):
            if self.check("if"):
                nested = self.if_statement()
                else_block = nested
                end = nested.source_section.char_end
            else:
                else_block, end = self.block()
        return IfNode(cond, then_block, else_block, self.section(start, end))

    def while_statement(self) -> ToyNode:
        start = self.advance().start
        cond = self.expression()
        body, end = self.block()
        return WhileNode(cond, body, self.section(start, end))

    def return_statement(self) -> ToyNode:
        tok = self.advance()
        end = tok.end
        child = None
        if self.peek().kind not in ("newline", ";", "eof", "}"):
            child = self.expression()
            end = child.source_section.char_end if child.source_section else end
        self.end_of_statement()
        return ReturnNode(child, self.section(tok.start, end))

    def def_statement(self) -> ToyNode:
        start = self.advance().start
        name_tok = self.expect("name", "function name")
        self.expect("(")
        params = []
        if not self.check(")"):
            params.append(self.expect("name", "parameter").text)
            while self.match(","):
                params.append(self.expect("name", "parameter").text)
        self.expect(")")

        # declare the function's name before parsing its body so recursive
        # references resolve to the outer slot
        outer = self.scope
        resolved = outer.resolve(name_tok.text)
        if resolved is None or resolved[0] != 0:
            slot = outer.declare(name_tok.text)
        else:
            slot = resolved[1]
        index = slot.index

        func_scope = _FuncScope(name_tok.text, self.scope)
        for p in params:
            func_scope.declare(p)
        self.scope = func_scope
        mark = len(self.collected_roots)
        body_block, end = self.block(root_tag=True)
        self.scope = outer

        whole = self.section(start, end)
        func_root = RootNode(name_tok.text, LANGUAGE_ID, body_block, whole,
                             func_scope.slots)
        func_root.lexical_parent = _PENDING
        func_root.param_count = len(params)
        # roots collected while parsing this body are lexically nested in it
        for nested in self.collected_roots[mark:]:
            if nested.lexical_parent is _PENDING:
                nested.lexical_parent = func_root
        self.collected_roots.append(func_root)
        return DefNode(index, func_root, whole)

    def block(self, root_tag: bool = False) -> tuple[ToyNode, int]:
        self.skip_newlines()
        open_tok = self.expect("{", "'{'")
        stmts = []
        self.skip_newlines()
        while not self.check("}"):
            if self.check("eof"):
                raise _syntax_error(self.source, open_tok.start, "unclosed block")
            stmts.append(self.statement())
            self.skip_newlines()
        close = self.advance()
        sec = self.section(open_tok.start, close.end)
        tags = frozenset({ROOT}) if root_tag else frozenset()
        node = BlockNode(sec, tags)
        node.adopt_children(stmts)
        return node, close.end

    # -- expressions -------------------------------------------------------

    def expression(self) -> ToyNode:
        return self.or_expr()

    def _binary_level(self, sub, ops, node_for):
        left = sub()
        while self.peek().kind in ops:
            op = self.advance().text
            right = sub()
            sec = self._span(left, right)
            left = node_for(op, left, right, sec)
        return left

    def _span(self, left: ToyNode, right: ToyNode) -> SourceSection:
        start = left.source_section.char_start if left.source_section else 0
        end = right.source_section.char_end if right.source_section else start
        return self.section(start, end)

    def or_expr(self):
        return self._binary_level(self.and_expr, {"or"}, ShortCircuitNode)

    def and_expr(self):
        return self._binary_level(self.equality, {"and"}, ShortCircuitNode)

    def equality(self):
        return self._binary_level(self.comparison, {"==", "!="}, self._make_binary)

    def comparison(self):
        return self._binary_level(self.term, {"<", "<=", ">", ">="}, self._make_binary)

    def term(self):
        return self._binary_level(self.factor, {"+", "-"}, self._make_binary)

    def factor(self):
        return self._binary_level(self.unary, {"*", "/", "%"}, self._make_binary)

    def _make_binary(self, op, left, right, sec):
        # spill a call result on the left so mid-statement values are inspectable
        if isinstance(left, CallNode):
            left = SpillNode(left, self.scope.new_temp().index)
        return UninitializedBinaryNode(op, left, right, sec)

    def unary(self):
        tok = self.peek()
        if tok.kind in ("-", "not"):
            self.advance()
            operand = self.unary()
            end = operand.source_section.char_end if operand.source_section else tok.end
            return UnaryNode(tok.text, operand, self.section(tok.start, end))
        return self.postfix()

    def postfix(self):
        node = self.primary()
        while self.check("("):
            self.advance()
            args = []
            if not self.check(")"):
                args.append(self.expression())
                while self.match(","):
                    args.append(self.expression())
            close = self.expect(")")
            start = node.source_section.char_start if node.source_section else close.start
            node = CallNode(node, args, self.section(start, close.end))
        return node

    def primary(self) -> ToyNode:
        tok = self.advance()
        sec = self.section(tok.start, tok.end)
        if tok.kind == "int":
            return LiteralNode(int(tok.text), sec)
        if tok.kind == "float":
            return LiteralNode(float(tok.text), sec)
        if tok.kind == "string":
            return LiteralNode(_unescape(tok.text, self.source, tok.start), sec)
        if tok.kind == "true":
            return LiteralNode(True, sec)
        if tok.kind == "false":
            return LiteralNode(False, sec)
        if tok.kind == "null":
            return LiteralNode(NULL, sec)
        if tok.kind == "name":
            resolved = self.scope.resolve(tok.text)
            if resolved is not None:
                depth, slot = resolved
                return ReadLocalNode(tok.text, depth, slot.index, sec)
            builtin = self.frontend.builtins.get(tok.text)
            if builtin is not None:
                return BuiltinRefNode(builtin, sec)
            return ReadUndefinedNode(tok.text, sec)
        if tok.kind == "(":
            expr = self.expression()
            self.expect(")")
            return expr
        raise _syntax_error(self.source, tok.start,
                            f"unexpected {tok.text or 'end of input'!r}")


_PENDING = object()


def _unescape(raw: str, source: Source, start: int) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            i += 1
            esc = body[i] if i < len(body) else ""
            if esc not in _ESCAPES:
                raise _syntax_error(source, start, f"bad escape '\\{esc}'")
            out.append(_ESCAPES[esc])
        else:
            out.append(ch)
        i += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# frontend


def _builtin_print(engine, args, node):
    frontend = engine.frontends[LANGUAGE_ID]
    engine.write_output(frontend.to_display_string(args[0]) + "\n")
    return NULL


def _builtin_clock(engine, args, node):
    return time.monotonic()


def _builtin_exit(engine, args, node):
    code = args[0]
    if type(code) is not int:
        raise GuestException(RUNTIME, "exit code must be an int",
                             location=node.source_section if node else None,
                             language_id=LANGUAGE_ID)
    raise GuestException(EXIT, f"exit({code})", exit_code=code,
                         language_id=LANGUAGE_ID)


class ToyLangFrontend(LanguageFrontend):
    language_id = LANGUAGE_ID

    def __init__(self):
        self.builtins = {
            "print": Builtin("print", 1, _builtin_print),
            "clock": Builtin("clock", 0, _builtin_clock),
            "exit": Builtin("exit", 1, _builtin_exit),
        }

    def parse(self, source: Source, engine) -> list[RootNode]:
        return Parser(source, self).parse_program()

    def bind_arguments(self, root: RootNode, frame: Frame, arguments: list):
        count = getattr(root, "param_count", 0)
        if len(arguments) != count:
            raise GuestException(
                RUNTIME, f"{root.name} expects {count} argument(s), got {len(arguments)}",
                location=root.source_section, language_id=LANGUAGE_ID)
        for i in range(count):
            frame.write(i, arguments[i])

    def to_display_string(self, value) -> str:
        if value is NULL:
            return "null"
        if value is UNDEFINED:
            return "undefined"
        if type(value) is bool:
            return "true" if value else "false"
        if type(value) is int:
            return str(value)
        if type(value) is float:
            return repr(value)
        if type(value) is str:
            return value
        if isinstance(value, Closure):
            return f"<fn {value.root.name}>"
        if isinstance(value, Builtin):
            return f"<builtin {value.name}>"
        return repr(value)

    def parse_inline(self, text: str, node: AstNode, frame: Optional[Frame]) -> AstNode:
        """Parse ``text`` as an expression or single assignment in ``node``'s
        lexical context."""
        root = node.root if not isinstance(node, RootNode) else node
        inline_source = Source(f"<inline:{text[:30]}>", LANGUAGE_ID, text, internal=True)
        parser = Parser(inline_source, self)
        parser.scope = _RootChainScope(root)
        parser.skip_newlines()
        tok = parser.peek()
        if tok.kind == "name" and parser.tokens[parser.pos + 1].kind == "=":
            name_tok = parser.advance()
            parser.expect("=")
            value = parser.expression()
            parser.skip_newlines()
            parser.expect("eof", "end of expression")
            resolved = parser.scope.resolve(name_tok.text)
            if resolved is None:
                slot = root.add_slot(name_tok.text)
                depth, index = 0, slot.index
            else:
                depth, slot = resolved
                index = slot.index
            sec = inline_source.section(0, len(text))
            fragment = InlineAssignNode(name_tok.text, depth, index, value, sec)
        else:
            fragment = parser.expression()
            parser.skip_newlines()
            parser.expect("eof", "end of expression")
        holder = InlineFragmentNode(fragment, inline_source.section(0, len(text)))
        _attach_fragment(holder, root)
        return holder

    def declare_expression_inputs(self, node: AstNode) -> list[int]:
        if isinstance(node, (BinaryNode, ShortCircuitNode)):
            return [0, 1]
        if isinstance(node, UnaryNode):
            return [0]
        if isinstance(node, CallNode):
            return list(range(len(node.children)))
        return []

    def wrap_exception(self, raw: Exception, node: Optional[AstNode] = None) -> GuestException:
        if isinstance(raw, GuestException):
            return raw
        from .values import INTERNAL
        return GuestException(INTERNAL, f"{type(raw).__name__}: {raw}",
                              location=node.source_section if node is not None else None,
                              language_id=LANGUAGE_ID)


class _RootChainScope:
    """Adapter exposing a loaded root's slot tables as a parser scope chain."""

    def __init__(self, root: RootNode):
        self.root = root
        self.temp_count = sum(1 for s in root.slots if s.internal)

    def resolve(self, name: str):
        root, depth = self.root, 0
        while root is not None:
            slot = root.slot_named(name)
            if slot is not None:
                return depth, slot
            root = getattr(root, "lexical_parent", None)
            depth += 1
        return None

    def declare(self, name: str, internal: bool = False):
        return self.root.add_slot(name, internal)

    def new_temp(self):
        slot = self.root.add_slot(f"$tmp{self.temp_count}", internal=True)
        self.temp_count += 1
        return slot


class InlineFragmentNode(ToyNode):
    """Holder for an inline-parsed expression; exists so the expression can
    self-specialize (rewrites need an attached parent)."""

    kind = "inline"

    def __init__(self, child: AstNode, section):
        super().__init__(section, frozenset())
        self.adopt_children([child])

    def execute(self, frame):
        return self.children[0].execute(frame)


def _attach_fragment(fragment: AstNode, root: RootNode):
    """Give the fragment engine access without splicing it into the tree."""
    class _Anchor:
        def __init__(self):
            self.engine = root.engine
            self.language_id = root.language_id
            self.name = f"<inline in {root.name}>"

        def invalidate_shape(self):
            pass  # fragments are never probed, so there is no shape to track
    anchor = _Anchor()
    def set_root(n):
        n.root = anchor
        for c in n.children:
            set_root(c)
    set_root(fragment)
