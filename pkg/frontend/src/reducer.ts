/**
 * UI session state as a pure function of the protocol transcript.
 *
 * Every state transition is driven by one of three actions: the socket
 * opening/closing, a request going out, or a server message coming in.
 * Replaying a recorded transcript therefore reconstructs the exact state the
 * live session had — the snapshot tests rely on this.
 */

import {
  GUEST_ERROR,
  isEvent,
  Method,
  Response,
  Scope,
  ServerEvent,
  ServerMessage,
  SourceInfo,
  StackFrame,
} from "./protocol.js";

export interface BreakpointUi {
  id: number;
  source: string;
  line: number; // resolved line once known, else the requested one
  condition: string | null;
  resolved: boolean;
}

export type RunState =
  | { kind: "idle" }
  | { kind: "running" }
  | { kind: "suspended"; reason: string; stack: StackFrame[]; activeFrame: number }
  | { kind: "terminated"; exitCode: number; error?: string };

export interface ConsoleEntry {
  kind: "eval" | "result" | "error" | "output" | "trace" | "info";
  text: string;
}

interface PendingRequest {
  method: Method;
  params: Record<string, unknown>;
}

export interface UiState {
  connection: "idle" | "open" | "closed";
  sources: SourceInfo[];
  texts: Record<string, string>;
  selectedSource: string | null;
  breakpoints: BreakpointUi[];
  run: RunState;
  scopes: Scope[] | null;
  showInternal: boolean;
  console: ConsoleEntry[];
  pending: Record<number, PendingRequest>;
}

export type Action =
  | { type: "socket-open" }
  | { type: "socket-closed" }
  | { type: "select-source"; name: string }
  | { type: "select-frame"; index: number }
  | { type: "toggle-internal" }
  | { type: "request-sent"; id: number; method: Method; params: Record<string, unknown> }
  | { type: "message"; message: ServerMessage };

export function initialState(): UiState {
  return {
    connection: "idle",
    sources: [],
    texts: {},
    selectedSource: null,
    breakpoints: [],
    run: { kind: "idle" },
    scopes: null,
    showInternal: false,
    console: [],
    pending: {},
  };
}

/** Methods legal to send in the given state (docs/protocol.md preconditions
 * plus the UI's own rule of never racing a second run). */
export function legalMethods(state: UiState): Set<Method> {
  if (state.connection !== "open") {
    return new Set();
  }
  const legal = new Set<Method>([
    "sources.list", "source.get", "source.load", "bp.set", "bp.remove",
    "coverage.enable", "trace.enable", "trace.disable",
  ]);
  if (state.run.kind === "idle" || state.run.kind === "terminated") {
    legal.add("run");
    legal.add("coverage.report");
  }
  if (state.run.kind === "suspended") {
    for (const method of ["resume", "stepInto", "stepOver", "stepOut",
                          "stack", "scopes", "eval"] as Method[]) {
      legal.add(method);
    }
  }
  return legal;
}

export function reduce(state: UiState, action: Action): UiState {
  switch (action.type) {
    case "socket-open":
      return { ...state, connection: "open" };
    case "socket-closed":
      return { ...state, connection: "closed" };
    case "select-source":
      return { ...state, selectedSource: action.name };
    case "select-frame":
      if (state.run.kind !== "suspended") {
        return state;
      }
      return {
        ...state,
        run: { ...state.run, activeFrame: action.index },
        scopes: null,
      };
    case "toggle-internal":
      return { ...state, showInternal: !state.showInternal };
    case "request-sent":
      return {
        ...state,
        pending: {
          ...state.pending,
          [action.id]: { method: action.method, params: action.params },
        },
      };
    case "message":
      return isEvent(action.message)
        ? applyEvent(state, action.message)
        : applyResponse(state, action.message);
  }
}

function applyEvent(state: UiState, event: ServerEvent): UiState {
  switch (event.event) {
    case "suspended": {
      const next: UiState = {
        ...state,
        run: {
          kind: "suspended",
          reason: event.params.reason,
          stack: event.params.stack,
          activeFrame: 0,
        },
        scopes: null,
      };
      if (event.params.conditionError) {
        next.console = [...state.console, {
          kind: "error",
          text: `breakpoint condition: ${event.params.conditionError}`,
        }];
      }
      return next;
    }
    case "resumed":
      return { ...state, run: { kind: "running" }, scopes: null };
    case "terminated": {
      const { exitCode, error } = event.params;
      const note = error
        ? `program terminated with error: ${error}`
        : `program terminated (exit ${exitCode})`;
      return {
        ...state,
        run: { kind: "terminated", exitCode, error },
        scopes: null,
        console: [...state.console, { kind: "info", text: note }],
      };
    }
    case "output":
      return {
        ...state,
        console: [...state.console,
                  { kind: "output", text: event.params.text }],
      };
    case "bp.resolved":
      return {
        ...state,
        breakpoints: state.breakpoints.map((bp) =>
          bp.id === event.params.id
            ? { ...bp, resolved: true, line: event.params.line }
            : bp),
      };
    case "trace": {
      const { source, line, col, root } = event.params;
      return {
        ...state,
        console: [...state.console,
                  { kind: "trace", text: `${source}:${line}:${col} in ${root}` }],
      };
    }
  }
}

function applyResponse(state: UiState, response: Response): UiState {
  if (response.id === null) {
    return withConsole(state, "error",
                       response.error?.message ?? "malformed request");
  }
  const pending = state.pending[response.id];
  if (pending === undefined) {
    return state;
  }
  const rest = { ...state.pending };
  delete rest[response.id];
  state = { ...state, pending: rest };
  if (response.error !== undefined) {
    const prefix = response.error.code === GUEST_ERROR ? "guest error" : "error";
    return withConsole(state, "error",
                       `${prefix}: ${response.error.message}`);
  }
  const result = response.result ?? {};
  switch (pending.method) {
    case "sources.list":
      return {
        ...state,
        sources: result.sources as SourceInfo[],
        selectedSource:
          state.selectedSource
          ?? (result.sources as SourceInfo[])[0]?.name
          ?? null,
      };
    case "source.get": {
      const name = result.name as string;
      return {
        ...state,
        texts: { ...state.texts, [name]: result.text as string },
        selectedSource: state.selectedSource ?? name,
      };
    }
    case "bp.set": {
      const bp: BreakpointUi = {
        id: result.id as number,
        source: pending.params.source as string,
        line: (result.line as number | null) ?? (pending.params.line as number),
        condition: (pending.params.condition as string | undefined) ?? null,
        resolved: result.resolved as boolean,
      };
      return { ...state, breakpoints: [...state.breakpoints, bp] };
    }
    case "bp.remove":
      return {
        ...state,
        breakpoints: state.breakpoints.filter(
          (bp) => bp.id !== (pending.params.id as number)),
      };
    case "run":
      return { ...state, run: { kind: "running" } };
    case "resume":
    case "stepInto":
    case "stepOver":
    case "stepOut":
      // the "resumed"/"suspended" events carry the real transition; the bare
      // acknowledgement only confirms the command was accepted
      return state;
    case "stack":
      if (state.run.kind !== "suspended") {
        return state;
      }
      return {
        ...state,
        run: { ...state.run, stack: result.stack as StackFrame[] },
      };
    case "scopes":
      return { ...state, scopes: result.scopes as Scope[] };
    case "eval":
      return withConsole(state, "result", result.value as string);
    default:
      return state;
  }
}

function withConsole(state: UiState, kind: ConsoleEntry["kind"],
                     text: string): UiState {
  return { ...state, console: [...state.console, { kind, text }] };
}

/** The line to highlight: the active frame's location while suspended. */
export function currentLocation(
  state: UiState,
): { source: string; line: number } | null {
  if (state.run.kind !== "suspended") {
    return null;
  }
  const frame = state.run.stack[state.run.activeFrame];
  if (frame === undefined || frame.source === undefined
      || frame.line === undefined) {
    return null;
  }
  return { source: frame.source, line: frame.line };
}
