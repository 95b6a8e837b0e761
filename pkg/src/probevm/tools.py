"""Built-in instruments layered on the client API: tracer, coverage,
counting profiler, and a statement-budget resource limiter.

Each tool is an ordinary binding; any subset can be active at once without
affecting the others or the program.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Callable, Optional

from .filters import new_filter
from .instrument import ExecutionEventListener
from .nodes import ROOT, STATEMENT


# ---------------------------------------------------------------------------
# tracing (the set_trace_func analog)


class TraceEvent:
    """What the trace callback sees; the variable snapshot is built lazily."""

    __slots__ = ("section", "root_name", "_frame", "_engine")

    def __init__(self, section, root_name, frame, engine):
        self.section = section
        self.root_name = root_name
        self._frame = frame
        self._engine = engine

    def variables(self) -> dict[str, str]:
        """Local variables as display strings (internal slots excluded)."""
        frame = self._frame
        frontend = self._engine.frontends[frame.root.language_id]
        out = {}
        for slot in frame.root.slots:
            if slot.internal:
                continue
            out[slot.name] = frontend.to_display_string(frame.read(slot.index))
        return out


class _TraceListener(ExecutionEventListener):
    def __init__(self, engine, callback):
        self.engine = engine
        self.callback = callback

    def on_enter(self, context, frame):
        self.callback(TraceEvent(context.source_section, context.root_name,
                                 frame, self.engine))


class TraceHandle:
    def __init__(self, binding):
        self.binding = binding

    def clear(self):
        self.binding.dispose()


def set_trace(engine, callback: Callable[[TraceEvent], None]) -> TraceHandle:
    """Invoke ``callback`` before every statement in non-internal sources."""
    filt = new_filter().tag_is(STATEMENT).build()
    binding = engine.instrumenter.attach_listener(filt, _TraceListener(engine, callback))
    return TraceHandle(binding)


def clear_trace(handle: TraceHandle):
    handle.clear()


# ---------------------------------------------------------------------------
# coverage


@dataclass(frozen=True)
class SectionKey:
    source_name: str
    char_start: int
    length: int
    line: int


class CoverageHandle(ExecutionEventListener):
    def __init__(self, engine):
        self.engine = engine
        self.counts: dict[SectionKey, int] = {}
        filt = new_filter().tag_is(STATEMENT).build()
        self.binding = engine.instrumenter.attach_listener(filt, self)
        self._filter = filt

    def on_enter(self, context, frame):
        key = _key_of(context.source_section)
        self.counts[key] = self.counts.get(key, 0) + 1

    def report(self) -> dict[str, dict[SectionKey, int]]:
        """Per source: every instrumented statement section -> count (0 if
        never executed)."""
        out: dict[str, dict[SectionKey, int]] = {}
        for root in self.engine.roots:
            for node in root.iter_tree():
                if node.is_tagged_with(STATEMENT) and self._filter.matches(node):
                    key = _key_of(node.source_section)
                    out.setdefault(key.source_name, {})[key] = self.counts.get(key, 0)
        return out

    def report_json(self) -> dict:
        report = self.report()
        return {
            "tool": "coverage",
            "sources": {
                name: [
                    {"start": k.char_start, "length": k.length,
                     "line": k.line, "count": count}
                    for k, count in sorted(sections.items(),
                                           key=lambda kv: kv[0].char_start)
                ]
                for name, sections in sorted(report.items())
            },
        }

    def dispose(self):
        self.binding.dispose()


def _key_of(section) -> SectionKey:
    return SectionKey(section.source.name, section.char_start, section.length,
                      section.line_col()[0])


def coverage_start(engine) -> CoverageHandle:
    return CoverageHandle(engine)


# ---------------------------------------------------------------------------
# counting profiler


@dataclass
class RootProfile:
    name: str
    source_name: str
    invocations: int = 0
    total_ns: int = 0


class ProfileHandle(ExecutionEventListener):
    """Counting profiler over root-entry events; times are inclusive."""

    def __init__(self, engine):
        self.engine = engine
        self.profiles: dict[tuple[str, str], RootProfile] = {}
        self._starts: list[tuple[tuple[str, str], int]] = []
        filt = new_filter().tag_is(ROOT).build()
        self.binding = engine.instrumenter.attach_listener(filt, self)

    def _key(self, context):
        return (context.root_name, context.source_section.source.name)

    def on_enter(self, context, frame):
        key = self._key(context)
        profile = self.profiles.get(key)
        if profile is None:
            profile = self.profiles[key] = RootProfile(key[0], key[1])
        profile.invocations += 1
        self._starts.append((key, time.monotonic_ns()))

    def _leave(self, context):
        now = time.monotonic_ns()
        if self._starts and self._starts[-1][0] == self._key(context):
            key, start = self._starts.pop()
            self.profiles[key].total_ns += now - start

    def on_return_value(self, context, frame, value):
        self._leave(context)

    def on_return_exceptional(self, context, frame, exception):
        self._leave(context)

    def report(self) -> list[RootProfile]:
        return sorted(self.profiles.values(), key=lambda p: -p.total_ns)

    def report_json(self) -> dict:
        return {
            "tool": "profile",
            "roots": [
                {"name": p.name, "source": p.source_name,
                 "invocations": p.invocations, "totalNs": p.total_ns}
                for p in self.report()
            ],
        }

    def dispose(self):
        self.binding.dispose()


def profile_start(engine) -> ProfileHandle:
    return ProfileHandle(engine)


# ---------------------------------------------------------------------------
# statement-budget limiter


class LimiterHandle(ExecutionEventListener):
    """Cancels execution once more than ``budget`` statements have run.

    Overshoot is at most one statement: the statement whose entry event trips
    the budget is cancelled at its own safepoint before it takes effect.
    """

    def __init__(self, engine, budget: int):
        self.engine = engine
        self.budget = budget
        self.executed = 0
        filt = new_filter().tag_is(STATEMENT).build()
        self.binding = engine.instrumenter.attach_listener(filt, self)

    def on_enter(self, context, frame):
        self.executed += 1
        if self.executed > self.budget:
            self.engine.cancel_execution(
                f"statement budget of {self.budget} exceeded")

    def dispose(self):
        self.binding.dispose()


def limit_statements(engine, budget: int) -> LimiterHandle:
    return LimiterHandle(engine, budget)


def report_to_json_text(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False)
