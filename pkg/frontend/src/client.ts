/**
 * Protocol client: owns the reducer state and the socket, and refuses to put
 * an illegal request on the wire. The socket is injected as a minimal
 * interface so tests can drive the client without a network.
 */

import { Method, ServerMessage } from "./protocol.js";
import {
  Action, initialState, legalMethods, reduce, UiState,
} from "./reducer.js";

export interface Socket {
  send(text: string): void;
  close(): void;
}

export class IllegalRequestError extends Error {
  constructor(method: Method, state: UiState) {
    super(`request ${method} is not legal while `
          + `${state.connection === "open" ? state.run.kind : "disconnected"}`);
  }
}

export type Listener = (state: UiState) => void;

export class DebugClient {
  private state: UiState = initialState();
  private socket: Socket | null = null;
  private nextId = 1;
  private listeners: Listener[] = [];

  getState(): UiState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private dispatch(action: Action): void {
    this.state = reduce(this.state, action);
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  attach(socket: Socket): void {
    this.socket = socket;
    this.dispatch({ type: "socket-open" });
  }

  onClose(): void {
    this.socket = null;
    this.dispatch({ type: "socket-closed" });
  }

  onMessage(raw: string): void {
    const message = JSON.parse(raw) as ServerMessage;
    this.dispatch({ type: "message", message });
  }

  /** Local, non-protocol state changes (pane selection etc.). */
  local(action: Action): void {
    this.dispatch(action);
  }

  isLegal(method: Method): boolean {
    return legalMethods(this.state).has(method);
  }

  /** Send a request; throws IllegalRequestError instead of emitting a frame
   * the server would reject for state reasons. */
  request(method: Method, params: Record<string, unknown> = {}): number {
    if (this.socket === null || !this.isLegal(method)) {
      throw new IllegalRequestError(method, this.state);
    }
    const id = this.nextId++;
    this.dispatch({ type: "request-sent", id, method, params });
    this.socket.send(JSON.stringify({ id, method, params }));
    return id;
  }

  /** Button-style entry point: no-op when the command is not legal. */
  requestIfLegal(method: Method,
                 params: Record<string, unknown> = {}): number | null {
    if (this.socket === null || !this.isLegal(method)) {
      return null;
    }
    return this.request(method, params);
  }
}
