/**
 * Wire types for the debug protocol (see ../../docs/protocol.md).
 *
 * Requests are `{id, method, params}`, responses `{id, result}` or
 * `{id, error: {code, message}}`, and server-initiated events are
 * `{event, params}`. All types here mirror the wire format exactly.
 */

export type Method =
  | "sources.list"
  | "source.get"
  | "source.load"
  | "bp.set"
  | "bp.remove"
  | "run"
  | "resume"
  | "stepInto"
  | "stepOver"
  | "stepOut"
  | "stack"
  | "scopes"
  | "eval"
  | "coverage.enable"
  | "coverage.report"
  | "trace.enable"
  | "trace.disable";

export interface Request {
  id: number;
  method: Method;
  params: Record<string, unknown>;
}

export interface ErrorBody {
  code: number;
  message: string;
}

export interface Response {
  id: number | null;
  result?: Record<string, unknown>;
  error?: ErrorBody;
}

// error codes (docs/protocol.md)
export const UNKNOWN_METHOD = -32601;
export const INVALID_PARAMS = -32602;
export const NOT_SUSPENDED = 1001;
export const GUEST_ERROR = 1002;

export interface SourceInfo {
  name: string;
  language: string;
  internal: boolean;
}

export interface StackFrame {
  name: string;
  source?: string;
  line?: number;
  col?: number;
}

export interface Variable {
  name: string;
  value: string;
}

export interface Scope {
  name: string;
  variables: Variable[];
}

export interface SuspendedParams {
  reason: string;
  stack: StackFrame[];
  breakpointId?: number;
  conditionError?: string;
}

export interface TerminatedParams {
  exitCode: number;
  error?: string;
}

export interface BreakpointResolvedParams {
  id: number;
  line: number;
}

export interface TraceParams {
  source: string;
  line: number;
  col: number;
  root: string;
}

export type ServerEvent =
  | { event: "suspended"; params: SuspendedParams }
  | { event: "resumed"; params: Record<string, never> }
  | { event: "terminated"; params: TerminatedParams }
  | { event: "output"; params: { text: string } }
  | { event: "bp.resolved"; params: BreakpointResolvedParams }
  | { event: "trace"; params: TraceParams };

export type ServerMessage = Response | ServerEvent;

export function isEvent(message: ServerMessage): message is ServerEvent {
  return "event" in message;
}
