/**
 * Client bookkeeping against a fake socket: request ids, response matching,
 * and the state transitions the panes render from.
 */

import { describe, expect, it } from "vitest";

import { DebugClient, Socket } from "../src/client.js";

class FakeSocket implements Socket {
  frames: Array<{ id: number; method: string; params: Record<string, unknown> }> = [];

  send(text: string): void {
    this.frames.push(JSON.parse(text));
  }

  close(): void {}
}

function connected(): [DebugClient, FakeSocket] {
  const client = new DebugClient();
  const socket = new FakeSocket();
  client.attach(socket);
  return [client, socket];
}

function respond(client: DebugClient, id: number,
                 result: Record<string, unknown>): void {
  client.onMessage(JSON.stringify({ id, result }));
}

describe("DebugClient", () => {
  it("assigns increasing request ids", () => {
    const [client, socket] = connected();
    client.request("sources.list");
    client.request("sources.list");
    expect(socket.frames.map((f) => f.id)).toEqual([1, 2]);
  });

  it("routes responses by pending method, not arrival order", () => {
    const [client] = connected();
    const listId = client.request("sources.list");
    const loadId = client.request("source.load",
                                  { name: "a.toy", language: "toylang",
                                    text: "x = 1\n" });
    // answer out of order
    respond(client, loadId, { name: "a.toy" });
    respond(client, listId, {
      sources: [{ name: "a.toy", language: "toylang", internal: false }],
    });
    expect(client.getState().sources).toEqual(
      [{ name: "a.toy", language: "toylang", internal: false }]);
    expect(client.getState().pending).toEqual({});
  });

  it("walks idle -> running -> suspended -> terminated", () => {
    const [client] = connected();
    expect(client.getState().run.kind).toBe("idle");
    const runId = client.request("run", { source: "a.toy" });
    respond(client, runId, {});
    expect(client.getState().run.kind).toBe("running");
    client.onMessage(JSON.stringify({
      event: "suspended",
      params: { reason: "breakpoint",
                stack: [{ name: "main", source: "a.toy", line: 1, col: 1 }] },
    }));
    expect(client.getState().run.kind).toBe("suspended");
    expect(client.isLegal("eval")).toBe(true);
    const resumeId = client.request("resume");
    respond(client, resumeId, {});
    client.onMessage(JSON.stringify({ event: "resumed", params: {} }));
    expect(client.getState().run.kind).toBe("running");
    client.onMessage(JSON.stringify(
      { event: "terminated", params: { exitCode: 0 } }));
    expect(client.getState().run.kind).toBe("terminated");
    expect(client.isLegal("run")).toBe(true); // can run again
  });

  it("notifies subscribers on every transition", () => {
    const [client] = connected();
    const kinds: string[] = [];
    client.subscribe((state) => kinds.push(state.run.kind));
    const id = client.request("run", { source: "a.toy" });
    respond(client, id, {});
    expect(kinds).toContain("running");
  });

  it("logs error responses to the console pane", () => {
    const [client] = connected();
    const id = client.request("source.get", { name: "ghost.toy" });
    client.onMessage(JSON.stringify({
      id, error: { code: -32602, message: "unknown source 'ghost.toy'" },
    }));
    const errors = client.getState().console.filter((e) => e.kind === "error");
    expect(errors.length).toBe(1);
    expect(errors[0].text).toContain("ghost.toy");
  });
});
