"""Independent reference evaluator for toylang.

Deliberately shares no code with the engine: its own tokenizer, its own
parser (to nested tuples, not AST node classes), and a naive environment-based
evaluator. It exists to produce ground truth for acceptance tests: program
result, printed output, per-line statement execution counts, and the ordered
statement sequence.
"""

from __future__ import annotations

import re

KEYWORDS = {"def", "if", "else", "while", "return", "true", "false", "null",
            "and", "or", "not"}

_TOKEN = re.compile(r"""
  (?P<ws>[\ \t]+) | (?P<comment>\#[^\n]*) | (?P<nl>\n)
| (?P<float>\d+\.\d+) | (?P<int>\d+)
| (?P<str>"(?:[^"\\\n]|\\.)*")
| (?P<name>[A-Za-z_][A-Za-z0-9_]*)
| (?P<op>==|!=|<=|>=|[+\-*/%<>=(){},;])
""", re.VERBOSE)

_ESC = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class OracleError(Exception):
    """Any guest-visible failure (syntax or runtime)."""


class ExitProgram(Exception):
    def __init__(self, code):
        self.code = code


def tokenize(text):
    out, pos, depth, line = [], 0, 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise OracleError(f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind == "nl":
            if depth == 0:
                out.append(("nl", "\n", line))
            line += 1
        elif kind not in ("ws", "comment"):
            tok = m.group()
            if kind == "op":
                if tok == "(":
                    depth += 1
                elif tok == ")":
                    depth = max(0, depth - 1)
                out.append((tok, tok, line))
            elif kind == "name" and tok in KEYWORDS:
                out.append((tok, tok, line))
            else:
                out.append((kind, tok, line))
        pos = m.end()
    out.append(("eof", "", line))
    return out


class Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise OracleError(f"expected {kind}, got {tok[1]!r}")
        return tok

    def skip_nl(self):
        while self.peek()[0] in ("nl", ";"):
            self.next()

    def program(self):
        stmts = []
        self.skip_nl()
        while self.peek()[0] != "eof":
            stmts.append(self.statement())
            self.skip_nl()
        return ("block", stmts)

    def block(self):
        self.expect("{")
        stmts = []
        self.skip_nl()
        while self.peek()[0] != "}":
            stmts.append(self.statement())
            self.skip_nl()
        self.expect("}")
        return ("block", stmts)

    def statement(self):
        kind, _, line = self.peek()
        if kind == "def":
            return self.def_stmt()
        if kind == "if":
            return self.if_stmt()
        if kind == "while":
            self.next()
            cond = self.expression()
            return ("while", line, cond, self.block())
        if kind == "return":
            self.next()
            if self.peek()[0] in ("nl", ";", "}", "eof"):
                return ("return", line, ("null",))
            return ("return", line, self.expression())
        if kind == "name" and self.toks[self.i + 1][0] == "=":
            name = self.next()[1]
            self.next()
            return ("assign", line, name, self.expression())
        return ("exprstmt", line, self.expression())

    def def_stmt(self):
        line = self.next()[2]
        name = self.expect("name")[1]
        self.expect("(")
        params = []
        if self.peek()[0] != ")":
            params.append(self.expect("name")[1])
            while self.peek()[0] == ",":
                self.next()
                params.append(self.expect("name")[1])
        self.expect(")")
        self.skip_nl()
        return ("def", line, name, params, self.block())

    def if_stmt(self):
        line = self.next()[2]
        cond = self.expression()
        then = self.block()
        other = None
        save = self.i
        self.skip_nl()
        if self.peek()[0] == "else":
            self.next()
            self.skip_nl()
            other = self.if_stmt() if self.peek()[0] == "if" else self.block()
        else:
            self.i = save
        return ("if", line, cond, then, other)

    # expressions, precedence climbing
    def expression(self):
        return self.or_expr()

    def or_expr(self):
        node = self.and_expr()
        while self.peek()[0] == "or":
            self.next()
            node = ("or", node, self.and_expr())
        return node

    def and_expr(self):
        node = self.not_expr()
        while self.peek()[0] == "and":
            self.next()
            node = ("and", node, self.not_expr())
        return node

    def not_expr(self):
        if self.peek()[0] == "not":
            self.next()
            return ("not", self.not_expr())
        return self.comparison()

    def comparison(self):
        node = self.additive()
        if self.peek()[0] in ("==", "!=", "<", "<=", ">", ">="):
            op = self.next()[0]
            node = ("bin", op, node, self.additive())
        return node

    def additive(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/", "%"):
            op = self.next()[0]
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.next()
            return ("neg", self.unary())
        return self.call()

    def call(self):
        node = self.primary()
        while self.peek()[0] == "(":
            self.next()
            args = []
            if self.peek()[0] != ")":
                args.append(self.expression())
                while self.peek()[0] == ",":
                    self.next()
                    args.append(self.expression())
            self.expect(")")
            node = ("call", node, args)
        return node

    def primary(self):
        kind, text, line = self.next()
        if kind == "int":
            return ("lit", int(text))
        if kind == "float":
            return ("lit", float(text))
        if kind == "str":
            out, i = [], 1
            while i < len(text) - 1:
                c = text[i]
                if c == "\\":
                    i += 1
                    out.append(_ESC.get(text[i], text[i]))
                else:
                    out.append(c)
                i += 1
            return ("lit", "".join(out))
        if kind == "true":
            return ("lit", True)
        if kind == "false":
            return ("lit", False)
        if kind == "null":
            return ("lit", None)
        if kind == "name":
            return ("var", text)
        if kind == "(":
            node = self.expression()
            self.expect(")")
            return node
        raise OracleError(f"unexpected {text!r}")


_MISSING = object()


class _Env:
    """One function activation; lookups climb the lexical chain."""

    def __init__(self, parent=None):
        self.vars = {}
        self.parent = parent

    def get(self, name):
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        return _MISSING

    def set(self, name, value):
        env = self
        while env is not None:
            if name in env.vars:
                env.vars[name] = value
                return
            env = env.parent
        self.vars[name] = value


class _Closure:
    def __init__(self, name, params, body, env):
        self.name = name
        self.params = params
        self.body = body
        self.env = env


class _Builtin:
    def __init__(self, name):
        self.name = name


class _Return(Exception):
    def __init__(self, value):
        self.value = value


def display(value):
    if value is None:
        return "null"
    if value is _MISSING:
        return "undefined"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    if isinstance(value, _Closure):
        return f"<fn {value.name}>"
    if isinstance(value, _Builtin):
        return f"<builtin {value.name}>"
    return repr(value)


class OracleRun:
    """Result of evaluating a program with the reference evaluator."""

    def __init__(self):
        self.output = []
        self.line_counts = {}        # (root_name, line) -> executions
        self.statement_sequence = [] # ordered (root_name, line)
        self.result = None
        self.exit_code = None

    @property
    def output_text(self):
        return "".join(self.output)


class Oracle:
    def __init__(self, text):
        self.ast = Parser(text).program()

    def run(self):
        run = OracleRun()
        env = _Env()
        try:
            run.result = self._block(self.ast, env, "main", run)
        except _Return as ret:
            run.result = ret.value
        except ExitProgram as exc:
            run.exit_code = exc.code
        return run

    def _block(self, node, env, root, run):
        result = None
        for stmt in node[1]:
            result = self._stmt(stmt, env, root, run)
        return result

    def _stmt(self, node, env, root, run):
        kind, line = node[0], node[1]
        if kind != "def":  # function definitions are not executable statements
            key = (root, line)
            run.line_counts[key] = run.line_counts.get(key, 0) + 1
            run.statement_sequence.append(key)
        if kind == "assign":
            env.set(node[2], self._eval(node[3], env, root, run))
            return None
        if kind == "exprstmt":
            return self._eval(node[2], env, root, run)
        if kind == "if":
            cond = self._require_bool(self._eval(node[2], env, root, run))
            if cond:
                return self._block(node[3], env, root, run)
            if node[4] is not None:
                if node[4][0] == "if":
                    return self._stmt(node[4], env, root, run)
                return self._block(node[4], env, root, run)
            return None
        if kind == "while":
            while self._require_bool(self._eval(node[2], env, root, run)):
                self._block(node[3], env, root, run)
            return None
        if kind == "return":
            raise _Return(self._eval(node[2], env, root, run))
        if kind == "def":
            env.vars[node[2]] = _Closure(node[2], node[3], node[4], env)
            return None
        raise OracleError(f"unknown statement {kind}")

    def _require_bool(self, value):
        if value is not True and value is not False:
            raise OracleError("condition must be a boolean")
        return value

    def _require_num(self, value):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise OracleError("expected a number")
        return value

    def _eval(self, node, env, root, run):
        kind = node[0]
        if kind == "lit":
            return node[1]
        if kind == "null":
            return None
        if kind == "var":
            value = env.get(node[1])
            if value is _MISSING:
                # builtins are modeled by name; real programs never observe
                # the difference unless they shadow a builtin (then the
                # variable wins, as above)
                if node[1] in ("print", "clock", "exit"):
                    return _Builtin(node[1])
                raise OracleError(f"variable {node[1]!r} is not defined")
            return value
        if kind == "neg":
            return -self._require_num(self._eval(node[1], env, root, run))
        if kind == "not":
            return not self._require_bool(self._eval(node[1], env, root, run))
        if kind == "and":
            return (self._require_bool(self._eval(node[1], env, root, run))
                    and self._require_bool(self._eval(node[2], env, root, run)))
        if kind == "or":
            return (self._require_bool(self._eval(node[1], env, root, run))
                    or self._require_bool(self._eval(node[2], env, root, run)))
        if kind == "bin":
            return self._binop(node[1],
                               self._eval(node[2], env, root, run),
                               self._eval(node[3], env, root, run))
        if kind == "call":
            return self._call(node, env, root, run)
        raise OracleError(f"unknown expression {kind}")

    def _binop(self, op, l, r):
        if op == "==":
            return self._equals(l, r)
        if op == "!=":
            return not self._equals(l, r)
        if op in ("<", "<=", ">", ">="):
            self._require_num(l), self._require_num(r)
            return {"<": l < r, "<=": l <= r, ">": l > r, ">=": l >= r}[op]
        if op == "+" and isinstance(l, str) and isinstance(r, str):
            return l + r
        self._require_num(l), self._require_num(r)
        if op == "/":
            if r == 0:
                raise OracleError("division by zero")
            return l / r
        if op == "%":
            if r == 0:
                raise OracleError("modulo by zero")
            return l % r
        return {"+": l + r, "-": l - r, "*": l * r}[op]

    def _equals(self, l, r):
        if type(l) is not type(r):
            return False
        return l == r

    def _call(self, node, env, root, run):
        callee = self._eval(node[1], env, root, run)
        args = [self._eval(a, env, root, run) for a in node[2]]
        if isinstance(callee, _Closure):
            if len(args) != len(callee.params):
                raise OracleError("arity mismatch")
            frame = _Env(parent=callee.env)
            for param, arg in zip(callee.params, args):
                frame.vars[param] = arg
            try:
                return self._block(callee.body, frame, callee.name, run)
            except _Return as ret:
                return ret.value
        if isinstance(callee, _Builtin):
            if callee.name == "print":
                if len(args) != 1:
                    raise OracleError("print expects 1 argument")
                run.output.append(display(args[0]) + "\n")
                return None
            if callee.name == "clock":
                import time
                return time.monotonic()
            if callee.name == "exit":
                raise ExitProgram(args[0])
        raise OracleError("not callable")


def evaluate(text):
    """Parse and run; returns an OracleRun."""
    return Oracle(text).run()
