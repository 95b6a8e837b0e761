"""WebSocket debug server.

One engine + debug session per process, one client at a time. The protocol is
JSON-RPC-shaped: requests are ``{"id", "method", "params"}``, responses are
``{"id", "result"}`` or ``{"id", "error": {"code", "message"}}``, and
server-initiated events are ``{"event", "params"}``. See docs/protocol.md for
the normative description.

The guest program runs on a dedicated engine thread; the websocket handler is
the control thread. Engine-side callbacks (suspension, output) cross back into
the event loop through ``loop.call_soon_threadsafe`` onto a bounded queue —
a client that stops reading is disconnected rather than stalling the engine.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .debugger import DebugSession, NotSuspended, SuspendedState
from .engine import Engine
from .tools import CoverageHandle, TraceHandle, set_trace
from .values import EXIT, GuestException

EVENT_QUEUE_LIMIT = 1024

UNKNOWN_METHOD = -32601
INVALID_PARAMS = -32602
NOT_SUSPENDED = 1001
GUEST_ERROR = 1002


class _RequestError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _section_location(section) -> dict:
    line, col, _, _ = section.line_col()
    return {"source": section.source.name, "line": line, "col": col}


def _stack_json(state: SuspendedState) -> list[dict]:
    out = []
    for entry in state.stack:
        frame = {"name": entry.root_name}
        if entry.section is not None:
            frame.update(_section_location(entry.section))
        out.append(frame)
    return out


class DebugServer:
    """Protocol state for one connected client."""

    def __init__(self, preload: Optional[tuple[str, str, str]] = None):
        self.engine = Engine(output=self._on_output)
        self.session = DebugSession(self.engine)
        self.session.on_suspend = self._on_suspend
        self.session.on_resume = self._on_resume
        self.session.on_breakpoint_resolved = self._on_bp_resolved
        self.loop = asyncio.get_running_loop()
        self.events: asyncio.Queue = asyncio.Queue(maxsize=EVENT_QUEUE_LIMIT)
        self.overflowed = asyncio.Event()
        self.running = False
        self.coverage: Optional[CoverageHandle] = None
        self.trace: Optional[TraceHandle] = None
        if preload is not None:
            name, language, text = preload
            self.engine.create_source(name, language, text)

    # -- events (engine thread -> event loop) -------------------------------

    def _emit(self, event: str, params: dict):
        def put():
            try:
                self.events.put_nowait({"event": event, "params": params})
            except asyncio.QueueFull:
                self.overflowed.set()
        self.loop.call_soon_threadsafe(put)

    def _on_output(self, text: str):
        self._emit("output", {"text": text})

    def _on_suspend(self, state: SuspendedState):
        params = {"reason": state.reason, "stack": _stack_json(state)}
        if state.breakpoint is not None:
            params["breakpointId"] = state.breakpoint.id
            if state.breakpoint.condition_error:
                params["conditionError"] = state.breakpoint.condition_error
        self._emit("suspended", params)

    def _on_resume(self):
        self._emit("resumed", {})

    def _on_bp_resolved(self, bp):
        self._emit("bp.resolved", {"id": bp.id, "line": bp.resolved_line})

    def _on_done(self, result, error: Optional[GuestException]):
        self.running = False
        if error is None:
            self._emit("terminated", {"exitCode": 0})
        elif error.kind == EXIT:
            self._emit("terminated", {"exitCode": error.exit_code})
        else:
            self._emit("terminated", {"exitCode": 1, "error": str(error)})

    # -- request dispatch ----------------------------------------------------

    async def handle(self, method: str, params: dict):
        handler = getattr(self, "_rpc_" + method.replace(".", "_"), None)
        if handler is None:
            raise _RequestError(UNKNOWN_METHOD, f"unknown method {method!r}")
        try:
            return await handler(params)
        except (KeyError, TypeError, ValueError) as exc:
            raise _RequestError(INVALID_PARAMS, f"invalid params: {exc}") from exc
        except NotSuspended:
            raise _RequestError(NOT_SUSPENDED, "not suspended") from None

    async def _rpc_sources_list(self, params):
        return {"sources": [
            {"name": s.name, "language": s.language_id, "internal": s.internal}
            for s in self.engine.sources.values()
        ]}

    async def _rpc_source_get(self, params):
        name = params["name"]
        source = self.engine.sources.get(name)
        if source is None:
            raise _RequestError(INVALID_PARAMS, f"unknown source {name!r}")
        return {"name": source.name, "language": source.language_id,
                "text": source.text}

    async def _rpc_source_load(self, params):
        source = self.engine.create_source(
            params["name"], params["language"], params["text"])
        return {"name": source.name}

    async def _rpc_bp_set(self, params):
        bp = self.session.set_breakpoint(
            params["source"], int(params["line"]), params.get("condition"))
        return {"id": bp.id, "resolved": bp.resolved,
                "line": bp.resolved_line}

    async def _rpc_bp_remove(self, params):
        self.session.remove_breakpoint(int(params["id"]))
        return {}

    async def _rpc_run(self, params):
        if self.running:
            raise _RequestError(INVALID_PARAMS, "already running")
        name = params["source"]
        source = self.engine.sources.get(name)
        if source is None:
            raise _RequestError(INVALID_PARAMS, f"unknown source {name!r}")
        self.running = True
        self.session.start(source, params.get("args", []), on_done=self._on_done)
        return {}

    async def _rpc_resume(self, params):
        self.session.continue_()
        return {}

    async def _rpc_stepInto(self, params):
        self.session.step_into()
        return {}

    async def _rpc_stepOver(self, params):
        self.session.step_over()
        return {}

    async def _rpc_stepOut(self, params):
        self.session.step_out()
        return {}

    async def _rpc_stack(self, params):
        state = self.session.stack()
        return {"reason": state.reason, "stack": _stack_json(state)}

    async def _rpc_scopes(self, params):
        index = int(params["frameIndex"])
        scopes = self.session.scopes(index)
        state = self.session.stack()
        frontend = self.engine.frontends[state.stack[index].frame.root.language_id]
        return {"scopes": [
            {"name": scope.name, "variables": [
                {"name": e.name, "value": frontend.to_display_string(e.value)}
                for e in scope.entries
            ]}
            for scope in scopes
        ]}

    async def _rpc_eval(self, params):
        index = int(params["frameIndex"])
        text = str(params["text"])
        try:
            display, _ = await asyncio.to_thread(
                self.session.eval_in_frame, index, text)
        except GuestException as exc:
            raise _RequestError(GUEST_ERROR, str(exc)) from None
        return {"value": display}

    async def _rpc_coverage_report(self, params):
        if self.coverage is None:
            raise _RequestError(INVALID_PARAMS, "coverage not enabled")
        return self.coverage.report_json()

    async def _rpc_coverage_enable(self, params):
        if self.coverage is None:
            self.coverage = CoverageHandle(self.engine)
        return {}

    async def _rpc_trace_enable(self, params):
        if self.trace is None:
            def on_statement(event):
                self._emit("trace", {**_section_location(event.section),
                                     "root": event.root_name})
            self.trace = set_trace(self.engine, on_statement)
        return {}

    async def _rpc_trace_disable(self, params):
        if self.trace is not None:
            self.trace.clear()
            self.trace = None
        return {}


def create_app(ui_dir: Optional[str] = None,
               preload: Optional[tuple[str, str, str]] = None) -> FastAPI:
    """``preload`` is an optional (name, language, text) source made available
    to every connecting client (the CLI's --debug-port mode uses it)."""
    app = FastAPI(title="probevm debug server")
    app.state.client_connected = False

    @app.websocket("/debug")
    async def debug_socket(ws: WebSocket):
        await ws.accept()
        if app.state.client_connected:
            await ws.close(code=4000, reason="another client is connected")
            return
        app.state.client_connected = True
        server = DebugServer(preload=preload)

        async def pump_events():
            while True:
                event = await server.events.get()
                await ws.send_text(json.dumps(event))

        pump = asyncio.create_task(pump_events())
        try:
            while True:
                if server.overflowed.is_set():
                    await ws.close(code=1013, reason="event queue overflow")
                    return
                raw = await ws.receive_text()
                try:
                    message = json.loads(raw)
                    req_id = message["id"]
                    method = message["method"]
                    params = message.get("params", {})
                except (json.JSONDecodeError, KeyError, TypeError):
                    await ws.send_text(json.dumps({
                        "id": None,
                        "error": {"code": INVALID_PARAMS,
                                  "message": "malformed request"}}))
                    continue
                try:
                    result = await server.handle(method, params)
                    reply = {"id": req_id, "result": result}
                except _RequestError as exc:
                    reply = {"id": req_id,
                             "error": {"code": exc.code, "message": exc.message}}
                await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            pump.cancel()
            app.state.client_connected = False
            # unblock a parked engine thread so the process can exit
            try:
                if server.session.suspended is not None:
                    server.engine.cancel_execution("client disconnected")
                    server.session.continue_()
            except NotSuspended:
                pass

    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = str(candidate) if candidate.is_dir() else None
    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(host: str = "127.0.0.1", port: int = 8765,
          ui_dir: Optional[str] = None,
          preload: Optional[tuple[str, str, str]] = None):
    import uvicorn
    uvicorn.run(create_app(ui_dir, preload), host=host, port=port,
                log_level="warning")
