"""Random terminating toylang programs for differential testing.

Programs are generated so they always terminate and never raise guest errors:
loops are bounded counter loops, every variable is assigned before it is read,
conditions are real comparisons, and division uses nonzero literal divisors.
One statement per line, so line-level statement counts are unambiguous.
"""

from __future__ import annotations

import random


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.lines: list[str] = []
        self.functions: list[tuple[str, int]] = []  # (name, arity)
        self.fresh = 0

    def emit(self, indent: int, text: str):
        self.lines.append("    " * indent + text)

    def name(self, prefix="v"):
        self.fresh += 1
        return f"{prefix}{self.fresh}"

    # -- expressions --------------------------------------------------------

    def num_literal(self):
        if self.rng.random() < 0.3:
            return f"{self.rng.randint(0, 9)}.{self.rng.randint(0, 9)}"
        return str(self.rng.randint(0, 20))

    def num_expr(self, env, depth=0):
        r = self.rng.random()
        if depth >= 2 or r < 0.35 or not env:
            return self.num_literal()
        if r < 0.6:
            return self.rng.choice(env)
        left = self.num_expr(env, depth + 1)
        right = self.num_expr(env, depth + 1)
        op = self.rng.choice(["+", "-", "*", "+", "-"])
        if self.rng.random() < 0.15:
            op, right = "/", str(self.rng.randint(1, 9))
        if self.rng.random() < 0.1:
            op, right = "%", str(self.rng.randint(1, 9))
        return f"({left} {op} {right})"

    def cond_expr(self, env):
        left = self.num_expr(env, 1)
        right = self.num_expr(env, 1)
        op = self.rng.choice(["<", "<=", ">", ">=", "==", "!="])
        cond = f"{left} {op} {right}"
        if self.rng.random() < 0.2:
            other = f"{self.num_expr(env, 1)} {self.rng.choice(['<', '>'])} {self.num_expr(env, 1)}"
            cond = f"{cond} {self.rng.choice(['and', 'or'])} {other}"
        if self.rng.random() < 0.1:
            cond = f"not ({cond})"
        return cond

    # -- statements ---------------------------------------------------------

    def statements(self, env, indent, budget, in_function):
        while budget > 0:
            budget -= 1
            r = self.rng.random()
            if r < 0.40 or not env:
                # never reassign loop counters (names starting with "i"):
                # a reset inside the loop body could prevent termination
                targets = [v for v in env if not v.startswith("i")]
                var = (self.rng.choice(targets)
                       if targets and self.rng.random() < 0.4 else self.name())
                self.emit(indent, f"{var} = {self.num_expr(env)}")
                if var not in env:
                    env.append(var)
            elif r < 0.55:
                self.emit(indent, f"print({self.rng.choice(env)})")
            elif r < 0.70 and indent < 3:
                budget = self.if_stmt(env, indent, budget, in_function)
            elif r < 0.82 and indent < 3:
                budget = self.while_stmt(env, indent, budget, in_function)
            elif r < 0.92 and self.functions:
                fn, arity = self.rng.choice(self.functions)
                args = ", ".join(self.num_expr(env, 1) for _ in range(arity))
                var = self.name()
                self.emit(indent, f"{var} = {fn}({args})")
                env.append(var)
            else:
                self.emit(indent, f"{self.num_expr(env)}")
        return budget

    def if_stmt(self, env, indent, budget, in_function):
        self.emit(indent, f"if {self.cond_expr(env)} {{")
        inner = min(budget, self.rng.randint(1, 3))
        self.statements(list(env), indent + 1, inner, in_function)
        budget -= inner
        if self.rng.random() < 0.5:
            self.emit(indent, "} else {")
            inner = min(max(budget, 1), self.rng.randint(1, 2))
            self.statements(list(env), indent + 1, inner, in_function)
            budget -= inner
        self.emit(indent, "}")
        return max(budget, 0)

    def while_stmt(self, env, indent, budget, in_function):
        counter = self.name("i")
        limit = self.rng.randint(1, 6)
        self.emit(indent, f"{counter} = 0")
        self.emit(indent, f"while {counter} < {limit} {{")
        inner = min(budget, self.rng.randint(1, 3))
        self.statements(list(env) + [counter], indent + 1, inner, in_function)
        budget -= inner
        self.emit(indent + 1, f"{counter} = {counter} + 1")
        self.emit(indent, "}")
        env.append(counter)
        return max(budget, 0)

    def function(self):
        fn = self.name("f")
        arity = self.rng.randint(0, 3)
        params = [self.name("p") for _ in range(arity)]
        self.emit(0, f"def {fn}({', '.join(params)}) {{")
        env = list(params)
        for param in params:
            # parameters may be any number; normalize so arithmetic is safe
            self.emit(1, f"{param} = {param} + 0")
        self.statements(env, 1, self.rng.randint(2, 5), True)
        self.emit(1, f"return {self.num_expr(env)}")
        self.emit(0, "}")
        self.functions.append((fn, arity))


def generate(seed: int, max_statements: int = 14) -> str:
    rng = random.Random(seed)
    gen = _Gen(rng)
    for _ in range(rng.randint(0, 2)):
        gen.function()
    env: list[str] = []
    gen.statements(env, 0, rng.randint(4, max_statements), False)
    if env:
        gen.emit(0, f"print({rng.choice(env)})")
    return "\n".join(gen.lines) + "\n"
