#!/usr/bin/env python3
"""Record the protocol transcript fixtures the frontend tests replay.

Each fixture is a complete scripted session against the in-process debug
server: every frame sent or received, in order. Rerun after any protocol
change, then re-run the frontend snapshot tests.
"""

import json
import sys
from pathlib import Path

from starlette.testclient import TestClient

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from probevm.server import create_app  # noqa: E402

OUT_DIR = Path(__file__).resolve().parents[1] / "frontend" / "fixtures"

PROGRAM = """\
x = 7
y = x + 1
print(y)
"""


class RecordingWire:
    def __init__(self, ws):
        self.ws = ws
        self.frames = []
        self._next_id = 0

    def send(self, method, **params):
        self._next_id += 1
        message = {"id": self._next_id, "method": method, "params": params}
        self.frames.append({"dir": "send", "message": message})
        self.ws.send_text(json.dumps(message))
        while True:
            reply = json.loads(self.ws.receive_text())
            self.frames.append({"dir": "recv", "message": reply})
            if "event" not in reply:
                assert reply["id"] == self._next_id, reply
                return reply

    def wait_event(self, name):
        while True:
            message = json.loads(self.ws.receive_text())
            self.frames.append({"dir": "recv", "message": message})
            if message.get("event") == name:
                return message


def common_prefix(wire):
    """connect -> load -> list -> get -> bp.set line 2 -> run -> suspended"""
    wire.send("source.load", name="p.toy", language="toylang", text=PROGRAM)
    wire.send("sources.list")
    wire.send("source.get", name="p.toy")
    wire.send("bp.set", source="p.toy", line=2)
    wire.send("run", source="p.toy")
    wire.wait_event("suspended")
    wire.send("stack")
    wire.send("scopes", frameIndex=0)


def record(name, script):
    with TestClient(create_app()) as client:
        with client.websocket_connect("/debug") as ws:
            wire = RecordingWire(ws)
            script(wire)
    path = OUT_DIR / f"{name}.json"
    path.write_text(json.dumps({"name": name, "frames": wire.frames},
                               indent=2) + "\n")
    print(f"wrote {path} ({len(wire.frames)} frames)")


def breakpoint_hit(wire):
    common_prefix(wire)
    wire.send("resume")
    wire.wait_event("terminated")


def eval_session(wire):
    common_prefix(wire)
    wire.send("eval", frameIndex=0, text="x")
    wire.send("eval", frameIndex=0, text="boom()")  # guest error -> code 1002
    wire.send("resume")
    wire.wait_event("terminated")


def step_session(wire):
    common_prefix(wire)
    wire.send("stepOver")
    wire.wait_event("suspended")
    wire.send("stack")
    wire.send("resume")
    wire.wait_event("terminated")


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    record("breakpoint-hit", breakpoint_hit)
    record("eval", eval_session)
    record("step", step_session)


if __name__ == "__main__":
    main()
