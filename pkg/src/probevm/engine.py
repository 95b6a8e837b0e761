"""The engine: source registry, guest execution, safepoints, and the command
queue that lets other threads mutate instrumentation safely.

Exactly one thread executes guest code at a time. attach/dispose/debug
commands may come from any thread; when the engine is busy they are queued and
applied at the next safepoint (statement entry or loop back-edge).
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .instrument import Instrumenter, ReentrancyError
from .nodes import ControlFlowSignal, Frame, RootNode, Scope, ScopeEntry, ScopeError
from .source import DuplicateSource, Source
from .values import (
    Builtin, CANCELLED, Closure, GuestException, INTERNAL, NULL, RUNTIME,
)

#: guest call depth limit; host RecursionError is mapped to the same error
MAX_CALL_DEPTH = 10_000


@dataclass
class Activation:
    root: RootNode
    frame: Frame
    call_node_section: object = None   # section of the call site in the caller
    current_section: object = None     # last statement entered in this frame


class Engine:
    def __init__(self, output: Optional[Callable[[str], None]] = None,
                 diagnostics: Optional[Callable[[str], None]] = None):
        self.sources: dict[str, Source] = {}
        self.roots: list[RootNode] = []
        self._roots_by_source: dict[str, list[RootNode]] = {}
        self.frontends: dict[str, object] = {}
        self.instrumenter = Instrumenter(self)
        self.closed = False
        self.call_stack: list[Activation] = []
        self._output: list[str] = []
        self._output_sink = output
        self._diagnostics: list[str] = []
        self._diag_sink = diagnostics
        self._pending: deque = deque()
        self._lock = threading.Lock()
        self._engine_thread: Optional[threading.Thread] = None
        self._cancel = False
        self._cancel_message = ""
        self._in_eval = False
        #: callbacks invoked after a source's roots are parsed and registered;
        #: used for deferred breakpoint resolution
        self.root_load_hooks: list[Callable[[list[RootNode]], None]] = []
        from . import toylang, minicalc
        self.register_frontend(toylang.ToyLangFrontend())
        self.register_frontend(minicalc.MiniCalcFrontend())

    def register_frontend(self, frontend):
        self.frontends[frontend.language_id] = frontend

    # -- sources -----------------------------------------------------------

    def create_source(self, name: str, language_id: str, text: str,
                      internal: bool = False) -> Source:
        if name in self.sources:
            raise DuplicateSource(f"source {name!r} already registered")
        source = Source(name, language_id, text, internal)
        self.sources[name] = source
        self.instrumenter.on_source_created(source)
        return source

    def load(self, source: Source) -> list[RootNode]:
        """Parse (once) and register the source's roots; returns all of them,
        entry root first."""
        if source.name in self._roots_by_source:
            return self._roots_by_source[source.name]
        frontend = self.frontends.get(source.language_id)
        if frontend is None:
            raise GuestException(INTERNAL, f"no frontend for {source.language_id!r}")
        roots = frontend.parse(source, self)
        self._roots_by_source[source.name] = roots
        for root in roots:
            root.engine = self
            self.roots.append(root)
            self.instrumenter.on_ast_loaded(root)
        for hook in self.root_load_hooks:
            hook(roots)
        return roots

    # -- execution ---------------------------------------------------------

    def run(self, source: Source, arguments: list = ()):
        roots = self.load(source)
        return self.execute_root(roots[0], list(arguments))

    def execute_root(self, root: RootNode, arguments: list):
        """Execute one root to completion; every failure surfaces as a
        GuestException (host errors become kind=Internal)."""
        me = threading.current_thread()
        with self._lock:
            if self._engine_thread is me and not self._in_eval:
                raise ReentrancyError("execute called from an event handler")
            busy = self._engine_thread is not None and self._engine_thread is not me
        if busy:
            raise ReentrancyError("engine already executing on another thread")
        self._engine_thread = me
        try:
            self._drain()
            return self.call(Closure(root, None), arguments, None)
        except GuestException as exc:
            raise
        except ControlFlowSignal as sig:
            return sig.value if sig.value is not None else NULL
        except RecursionError:
            raise GuestException(RUNTIME, "stack overflow") from None
        except Exception as exc:
            raise GuestException(INTERNAL, f"{type(exc).__name__}: {exc}") from exc
        finally:
            self._engine_thread = None
            self._cancel = False

    def call(self, callee, arguments: list, call_node):
        """Invoke a guest callable; used by call nodes and by execute_root."""
        section = call_node.source_section if call_node is not None else None
        if isinstance(callee, Builtin):
            if len(arguments) != callee.arity:
                raise GuestException(
                    RUNTIME,
                    f"{callee.name} expects {callee.arity} argument(s), got {len(arguments)}",
                    location=section)
            return callee.fn(self, arguments, call_node)
        if not isinstance(callee, Closure):
            frontend = self.frontends.get(
                call_node.root.language_id) if call_node is not None else None
            shown = frontend.to_display_string(callee) if frontend else repr(callee)
            raise GuestException(RUNTIME, f"{shown} is not callable", location=section)
        root = callee.root
        if len(self.call_stack) >= MAX_CALL_DEPTH:
            raise GuestException(RUNTIME, "stack overflow", location=section)
        frame = Frame(root, arguments, parent=callee.captured_frame)
        frontend = self.frontends[root.language_id]
        frontend.bind_arguments(root, frame, arguments)
        activation = Activation(root, frame, call_node_section=section)
        self.call_stack.append(activation)
        try:
            try:
                result = root.body.execute(frame)
            except ControlFlowSignal as sig:
                result = sig.value if sig.value is not None else NULL
            return result
        except GuestException as exc:
            exc.guest_stack.append((root.name, activation.current_section))
            if not exc.language_id:
                exc.language_id = root.language_id
            raise
        except RecursionError:
            raise GuestException(RUNTIME, "stack overflow", location=section) from None
        finally:
            self.call_stack.pop()

    @property
    def current_activation(self) -> Optional[Activation]:
        return self.call_stack[-1] if self.call_stack else None

    @property
    def call_depth(self) -> int:
        return len(self.call_stack)

    # -- safepoints and cross-thread commands ------------------------------

    def submit(self, command: Callable[[], None]):
        """Run ``command`` on the engine thread: immediately when idle or
        already on it, else at the next safepoint."""
        with self._lock:
            if self._engine_thread is None or self._engine_thread is threading.current_thread():
                run_now = True
            else:
                self._pending.append(command)
                run_now = False
        if run_now:
            command()

    def safepoint_poll(self):
        if self._pending:
            self._drain()
        if self._cancel:
            self._cancel = False
            raise GuestException(CANCELLED, self._cancel_message or "execution cancelled")

    def _drain(self):
        while True:
            with self._lock:
                if not self._pending:
                    return
                command = self._pending.popleft()
            command()

    def cancel_execution(self, message: str = "execution cancelled"):
        """Request termination; takes effect at the next statement boundary."""
        self._cancel_message = message
        self._cancel = True

    # -- scopes ------------------------------------------------------------

    def find_local_scopes(self, node, frame: Frame, include_internal: bool = False):
        """Innermost scope first; one flat local scope per frame."""
        root = node.root if node is not None else frame.root
        if root is not frame.root:
            raise ScopeError("frame does not belong to the node's root")
        entries = []
        for slot in frame.root.slots:
            if slot.internal and not include_internal:
                continue
            entries.append(ScopeEntry(slot.name, frame.read(slot.index),
                                      writable=True, internal=slot.internal))
        return [Scope(name=frame.root.name, entries=entries)]

    def find_top_scopes(self, include_internal: bool = False):
        entries = []
        for frontend in self.frontends.values():
            for b in getattr(frontend, "builtins", {}).values():
                entries.append(ScopeEntry(b.name, b, writable=False, internal=False))
        return [Scope(name="builtins", entries=entries)]

    # -- output / diagnostics ---------------------------------------------

    def write_output(self, text: str):
        self._output.append(text)
        if self._output_sink is not None:
            self._output_sink(text)

    def output_text(self) -> str:
        return "".join(self._output)

    def clear_output(self):
        self._output.clear()

    def report_diagnostic(self, line: str):
        self._diagnostics.append(line)
        if self._diag_sink is not None:
            self._diag_sink(line + "\n")

    @property
    def diagnostics(self) -> list[str]:
        return self._diagnostics

    def close(self):
        self.closed = True
