"""probevm: an AST interpreter with dynamically inserted instrumentation
probes powering a debugger, tracer, coverage tool, profiler, and resource
limiter over two guest languages."""

from .engine import Engine
from .filters import new_filter, SourceSectionFilter
from .instrument import (
    EventBinding, EventContext, ExecutionEventListener, ExecutionEventNode,
)
from .source import Source, SourceSection
from .values import GuestException

__all__ = [
    "Engine",
    "EventBinding",
    "EventContext",
    "ExecutionEventListener",
    "ExecutionEventNode",
    "GuestException",
    "Source",
    "SourceSection",
    "SourceSectionFilter",
    "new_filter",
]
