"""Debug sessions built entirely on the instrumentation client API.

Unconditional breakpoints are listener bindings; conditional breakpoints are
factory bindings whose injected fragment evaluates the condition in the
breakpoint's lexical context. Stepping is a statement-filter binding with
call-depth bookkeeping, attached only while stepping so a continued program
runs on the restored, unprobed tree.

The engine thread blocks on a rendezvous while suspended; resume commands
arrive from a control thread. Inspection and eval are legal only while
suspended (the engine is parked, so frame access is safe).
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from .engine import Engine
from .filters import new_filter
from .instrument import EventContext, ExecutionEventListener, ExecutionEventNode
from .nodes import STATEMENT, Scope
from .source import Source
from .values import GuestException

RUN = "Run"
STEP_INTO = "StepInto"
STEP_OVER = "StepOver"
STEP_OUT = "StepOut"

_bp_ids = itertools.count(1)


class DebuggerError(Exception):
    pass


class NotSuspended(DebuggerError):
    pass


@dataclass
class Breakpoint:
    id: int
    source_name: str
    requested_line: int
    condition: Optional[str]
    enabled: bool = True
    hit_count: int = 0
    resolved: bool = False
    resolved_line: Optional[int] = None
    condition_error: Optional[str] = None
    binding: object = None


@dataclass
class StackEntry:
    root_name: str
    section: object
    frame: object
    internal: bool = False


@dataclass
class SuspendedState:
    context: EventContext
    reason: str
    stack: list[StackEntry] = field(default_factory=list)  # innermost first
    breakpoint: Optional[Breakpoint] = None


class _BreakListener(ExecutionEventListener):
    def __init__(self, session: "DebugSession", bp: Breakpoint):
        self.session = session
        self.bp = bp

    def on_enter(self, context, frame):
        bp = self.bp
        if not bp.enabled:
            return
        if context.source_section.line_col()[0] != bp.resolved_line:
            return  # overlap-matched multi-line statement starting elsewhere
        bp.hit_count += 1
        self.session._suspend(context, frame, "breakpoint", bp)


class _CondBreakNode(ExecutionEventNode):
    """Injected fragment: evaluate the condition, suspend only when true.

    A non-boolean result or a guest error from the condition suspends too and
    records a condition error on the breakpoint, instead of silently coercing.
    """

    def __init__(self, context, session: "DebugSession", bp: Breakpoint, cond_fragment):
        super().__init__(context)
        self.session = session
        self.bp = bp
        self.cond_fragment = cond_fragment

    def on_enter(self, frame):
        bp = self.bp
        if not bp.enabled:
            return
        if self.context.source_section.line_col()[0] != bp.resolved_line:
            return
        try:
            result = self.cond_fragment.execute(frame)
        except GuestException as exc:
            bp.condition_error = str(exc)
            bp.hit_count += 1
            self.session._suspend(self.context, frame, "breakpoint-condition-error", bp)
            return
        if type(result) is bool:
            if result:
                bp.hit_count += 1
                self.session._suspend(self.context, frame, "breakpoint", bp)
        else:
            frontend = self.session.engine.frontends[self.context.language_id]
            bp.condition_error = (
                f"condition produced {frontend.to_display_string(result)}, expected a boolean")
            bp.hit_count += 1
            self.session._suspend(self.context, frame, "breakpoint-condition-error", bp)


class _StepListener(ExecutionEventListener):
    def __init__(self, session: "DebugSession"):
        self.session = session

    def on_enter(self, context, frame):
        self.session._on_step_statement(context, frame)


class DebugSession:
    """One debugging client per engine."""

    def __init__(self, engine: Engine, include_internal: bool = False):
        self.engine = engine
        self.include_internal = include_internal
        self.breakpoints: dict[int, Breakpoint] = {}
        self.mode = RUN
        self._mode_depth = 0
        self.suspended: Optional[SuspendedState] = None
        self._cond = threading.Condition()
        self._resume_requested = False
        self._evaluating = False
        self._step_binding = None
        self._terminated = False
        self._pending: list[Breakpoint] = []
        self._thread: Optional[threading.Thread] = None
        self.on_suspend: Optional[Callable[[SuspendedState], None]] = None
        self.on_resume: Optional[Callable[[], None]] = None
        engine.root_load_hooks.append(self._on_roots_loaded)

    # -- breakpoints -------------------------------------------------------

    def set_breakpoint(self, source_name: str, line: int,
                       condition: Optional[str] = None) -> Breakpoint:
        bp = Breakpoint(next(_bp_ids), source_name, line, condition)
        self.breakpoints[bp.id] = bp
        self._try_resolve(bp)
        return bp

    def _try_resolve(self, bp: Breakpoint):
        target = self._find_statement_line(bp.source_name, bp.requested_line)
        if target is None:
            self._pending.append(bp)
            return
        line, node = target
        bp.resolved = True
        bp.resolved_line = line
        builder = (new_filter().source_is(bp.source_name).line_is(line)
                   .tag_is(STATEMENT))
        if self.include_internal:
            builder = builder.include_internal()
        filt = builder.build()
        if bp.condition is None:
            bp.binding = self.engine.instrumenter.attach_listener(
                filt, _BreakListener(self, bp))
        else:
            bp.binding = self.engine.instrumenter.attach_factory(
                filt, self._condition_factory(bp))
        if self.on_breakpoint_resolved is not None:
            self.on_breakpoint_resolved(bp)

    on_breakpoint_resolved: Optional[Callable[[Breakpoint], None]] = None

    def _condition_factory(self, bp: Breakpoint):
        def create(context: EventContext):
            frontend = self.engine.frontends[context.language_id]
            cond_fragment = frontend.parse_inline(bp.condition, context.node, None)
            return _CondBreakNode(context, self, bp, cond_fragment)
        return create

    def _find_statement_line(self, source_name: str, line: int):
        """The statement anchoring a breakpoint at ``line``: one covering the
        line, else the first statement starting on a later line."""
        best = None
        for root in self.engine.roots:
            sec = root.source_section
            if sec is None or sec.source.name != source_name:
                continue
            for node in root.iter_tree():
                if not node.is_tagged_with(STATEMENT) or node.source_section is None:
                    continue
                start = node.source_section.line_col()[0]
                if node.source_section.covers_line(line):
                    return line, node
                if start > line and (best is None or start < best[0]):
                    best = (start, node)
        return best

    def _on_roots_loaded(self, roots):
        pending, self._pending = self._pending, []
        for bp in pending:
            self._try_resolve(bp)

    def remove_breakpoint(self, bp_id: int):
        bp = self.breakpoints.pop(bp_id, None)
        if bp is None:
            return
        if bp in self._pending:
            self._pending.remove(bp)
        if bp.binding is not None:
            bp.binding.dispose()

    def disable_breakpoint(self, bp_id: int):
        self.breakpoints[bp_id].enabled = False

    def enable_breakpoint(self, bp_id: int):
        self.breakpoints[bp_id].enabled = True

    # -- running -----------------------------------------------------------

    def run(self, source: Source, arguments: list = ()):
        """Execute on the calling thread (which becomes the engine thread)."""
        return self.engine.run(source, arguments)

    def start(self, source: Source, arguments: list = (),
              on_done: Optional[Callable] = None) -> threading.Thread:
        """Execute on a dedicated engine thread; control stays with the caller."""
        self._terminated = False

        def target():
            error = None
            result = None
            try:
                result = self.engine.run(source, arguments)
            except GuestException as exc:
                error = exc
            finally:
                with self._cond:
                    self.suspended = None
                    self._terminated = True
                    self._cond.notify_all()
            if on_done is not None:
                on_done(result, error)
        self._thread = threading.Thread(target=target, name="probevm-engine", daemon=True)
        self._thread.start()
        return self._thread

    # -- suspension rendezvous ---------------------------------------------

    def _suspend(self, context: EventContext, frame, reason: str,
                 bp: Optional[Breakpoint] = None):
        if self._evaluating:
            return
        state = SuspendedState(context=context, reason=reason, breakpoint=bp)
        stack = []
        activations = self.engine.call_stack
        for i, act in enumerate(reversed(activations)):
            section = context.source_section if i == 0 else act.current_section
            internal = bool(act.root.source_section is not None
                            and act.root.source_section.source.internal)
            entry = StackEntry(act.root.name, section, act.frame, internal)
            if internal and not self.include_internal:
                continue
            stack.append(entry)
        state.stack = stack
        with self._cond:
            self.suspended = state
            self._resume_requested = False
            self._cond.notify_all()
        if self.on_suspend is not None:
            self.on_suspend(state)
        with self._cond:
            # _resume clears self.suspended itself, so a control thread that
            # calls wait_suspended right after resuming can never observe the
            # stale state
            while not self._resume_requested:
                self._cond.wait()
        if self.on_resume is not None:
            self.on_resume()

    def wait_suspended(self, timeout: float = 10.0) -> SuspendedState:
        """Test/control helper: block until the engine reaches a suspension."""
        with self._cond:
            deadline = threading.TIMEOUT_MAX if timeout is None else timeout
            if not self._cond.wait_for(
                    lambda: self.suspended is not None or self._terminated,
                    timeout=deadline):
                raise DebuggerError("timed out waiting for suspension")
            if self.suspended is None:
                raise DebuggerError("execution terminated without suspending")
            return self.suspended

    def _resume(self, mode: str):
        with self._cond:
            if self.suspended is None:
                raise NotSuspended("no suspended execution to resume")
            self.mode = mode
            self._mode_depth = self.engine.call_depth
            self.suspended = None
            self._resume_requested = True
            self._cond.notify_all()

    def continue_(self):
        self._drop_step_binding()
        self._resume(RUN)

    def step_into(self):
        self._ensure_step_binding()
        self._resume(STEP_INTO)

    def step_over(self):
        self._ensure_step_binding()
        self._resume(STEP_OVER)

    def step_out(self):
        self._ensure_step_binding()
        self._resume(STEP_OUT)

    def _ensure_step_binding(self):
        if self._step_binding is None:
            builder = new_filter().tag_is(STATEMENT)
            if self.include_internal:
                builder = builder.include_internal()
            filt = builder.build()
            self._step_binding = self.engine.instrumenter.attach_listener(
                filt, _StepListener(self))

    def _drop_step_binding(self):
        if self._step_binding is not None:
            self._step_binding.dispose()
            self._step_binding = None

    def _on_step_statement(self, context, frame):
        mode = self.mode
        if mode == RUN:
            return
        depth = self.engine.call_depth
        if mode == STEP_INTO:
            hit = True
        elif mode == STEP_OVER:
            hit = depth <= self._mode_depth
        elif mode == STEP_OUT:
            hit = depth < self._mode_depth
        else:
            hit = False
        if hit:
            self.mode = RUN
            self._suspend(context, frame, "step")

    # -- inspection --------------------------------------------------------

    def _require_suspended(self) -> SuspendedState:
        state = self.suspended
        if state is None:
            raise NotSuspended("not suspended")
        return state

    def stack(self) -> SuspendedState:
        return self._require_suspended()

    def scopes(self, frame_index: int) -> list[Scope]:
        state = self._require_suspended()
        entry = state.stack[frame_index]
        return self.engine.find_local_scopes(None, entry.frame,
                                             include_internal=self.include_internal)

    def eval_in_frame(self, frame_index: int, text: str):
        """Evaluate ``text`` in the chosen frame; returns (display, value).

        Guest errors propagate as GuestException; the session stays suspended
        either way. Writes to frame slots persist after resume.
        """
        state = self._require_suspended()
        entry = state.stack[frame_index]
        root = entry.frame.root
        frontend = self.engine.frontends[root.language_id]
        fragment = frontend.parse_inline(text, root, entry.frame)
        self._evaluating = True
        try:
            value = fragment.execute(entry.frame)
        finally:
            self._evaluating = False
        return frontend.to_display_string(value), value
