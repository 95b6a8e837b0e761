"""Overhead experiments: measure what instrumentation costs when unused,
when active, and after removal.

Two experiments, five configurations each:

* ``settrace``   — disabled, before, empty, increment, after
* ``breakpoints`` — disabled, before, not-taken, conditional, after

Every configuration gets its own engine running the same fixture. One
measurement "round" times each configuration once, in order; rounds are
interleaved so slow clock or thermal drift hits all configurations equally
instead of biasing whichever ran last. Warmup rounds additionally let lazily
unspliced wrappers disappear before timing starts.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from .debugger import DebugSession
from .engine import Engine
from .filters import new_filter
from .nodes import STATEMENT
from .tools import set_trace

WARMUP_ROUNDS = 2
DEFAULT_ITERATIONS = 10

FIXTURE_PATH = Path(__file__).resolve().parents[2] / "fixtures" / "mandelbrot.toy"

#: fixture lines the breakpoint experiment targets (1-based, tied to the
#: fixture's shape: a hot inner-loop statement and a statement never reached)
HOT_LINE = 24          # "zr = zr2 - zi2 + cr"
UNREACHED_LINE = 39    # inside the "if width < 0" branch


@dataclass
class ConfigResult:
    name: str
    times: list[float] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return statistics.mean(self.times)

    @property
    def stdev(self) -> float:
        return statistics.stdev(self.times) if len(self.times) > 1 else 0.0

    @property
    def median(self) -> float:
        return statistics.median(self.times)


@dataclass
class ExperimentResult:
    experiment: str
    iterations: int
    configs: list[ConfigResult]

    def config(self, name: str) -> ConfigResult:
        for c in self.configs:
            if c.name == name:
                return c
        raise KeyError(name)

    def ratio(self, name: str, base: str = "disabled") -> float:
        """Median-based: a single descheduled iteration should not move the
        overhead ratios."""
        return self.config(name).median / self.config(base).median


class _Config:
    """One named engine setup; ``prepare`` runs once before any timing."""

    def __init__(self, name: str, fixture_text: str, prepare=None):
        self.name = name
        self.engine = Engine()
        source = self.engine.create_source("mandelbrot.toy", "toylang", fixture_text)
        self.engine.load(source)
        if prepare is not None:
            prepare(self.engine)

    def run_once(self) -> float:
        self.engine.clear_output()
        start = time.perf_counter()
        self.engine.execute_root(self.engine.roots[0], [])
        return time.perf_counter() - start


def _settrace_configs(fixture_text: str) -> list[_Config]:
    counter = [0]

    def before(engine):
        # infrastructure consulted but nothing in this program matches
        unmatched = new_filter().source_is("no-such-source").tag_is(STATEMENT).build()
        engine.instrumenter.attach_listener(unmatched, _NullListener())

    def after(engine):
        set_trace(engine, lambda event: None).clear()

    return [
        _Config("disabled", fixture_text),
        _Config("before", fixture_text, before),
        _Config("empty", fixture_text,
                lambda engine: set_trace(engine, lambda event: None)),
        _Config("increment", fixture_text,
                lambda engine: set_trace(
                    engine, lambda event: counter.__setitem__(0, counter[0] + 1))),
        _Config("after", fixture_text, after),
    ]


def _breakpoint_configs(fixture_text: str) -> list[_Config]:
    def before(engine):
        DebugSession(engine)

    def not_taken(engine):
        DebugSession(engine).set_breakpoint("mandelbrot.toy", UNREACHED_LINE)

    def conditional(engine):
        DebugSession(engine).set_breakpoint("mandelbrot.toy", HOT_LINE,
                                            condition="iter > 999999")

    def after(engine):
        session = DebugSession(engine)
        bp = session.set_breakpoint("mandelbrot.toy", HOT_LINE)
        session.remove_breakpoint(bp.id)

    return [
        _Config("disabled", fixture_text),
        _Config("before", fixture_text, before),
        _Config("not-taken", fixture_text, not_taken),
        _Config("conditional", fixture_text, conditional),
        _Config("after", fixture_text, after),
    ]


class _NullListener:
    def on_enter(self, context, frame):
        pass

    def on_return_value(self, context, frame, value):
        pass

    def on_return_exceptional(self, context, frame, exception):
        pass


def run_experiment(experiment: str, iterations: int = DEFAULT_ITERATIONS,
                   fixture_text: str | None = None) -> ExperimentResult:
    if fixture_text is None:
        fixture_text = FIXTURE_PATH.read_text()
    if experiment == "settrace":
        configs = _settrace_configs(fixture_text)
    elif experiment == "breakpoints":
        configs = _breakpoint_configs(fixture_text)
    else:
        raise ValueError(f"unknown experiment {experiment!r}")
    results = {c.name: ConfigResult(c.name) for c in configs}
    for _ in range(WARMUP_ROUNDS):
        for config in configs:
            config.run_once()
    for _ in range(iterations):
        for config in configs:
            results[config.name].times.append(config.run_once())
    return ExperimentResult(experiment, iterations,
                            [results[c.name] for c in configs])


def format_table(result: ExperimentResult) -> str:
    header = f"{result.experiment} — mean seconds/iteration ± stddev " \
             f"({result.iterations} iterations, {WARMUP_ROUNDS} warmup)"
    names = [c.name for c in result.configs]
    widths = [max(len(n), 16) for n in names]
    row1 = "  ".join(n.ljust(w) for n, w in zip(names, widths))
    row2 = "  ".join(f"{c.mean:.4f} ± {c.stdev:.4f}".ljust(w)
                     for c, w in zip(result.configs, widths))
    ratios = "  ".join(f"{result.ratio(c.name):.3f}x".ljust(w)
                       for c, w in zip(result.configs, widths))
    return "\n".join([header, row1, row2, "ratios vs disabled (median):", ratios])
