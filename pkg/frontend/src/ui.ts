/**
 * DOM panes: source view with gutter breakpoints, run/step controls, stack
 * and variables, eval console. Pure render-from-state; all logic lives in
 * the reducer and client so this file stays a thin projection.
 */

import { DebugClient } from "./client.js";
import { Method } from "./protocol.js";
import { currentLocation, UiState } from "./reducer.js";

const CONTROL_BUTTONS: Array<[string, Method]> = [
  ["Run", "run"],
  ["Resume", "resume"],
  ["Step Into", "stepInto"],
  ["Step Over", "stepOver"],
  ["Step Out", "stepOut"],
];

export class DebuggerView {
  private readonly root: HTMLElement;
  private readonly client: DebugClient;

  constructor(root: HTMLElement, client: DebugClient) {
    this.root = root;
    this.client = client;
    client.subscribe((state) => this.render(state));
    this.render(client.getState());
  }

  private render(state: UiState): void {
    this.root.textContent = "";
    this.root.append(
      this.renderControls(state),
      this.renderSourceList(state),
      this.renderSource(state),
      this.renderStack(state),
      this.renderVariables(state),
      this.renderConsole(state),
    );
  }

  private renderControls(state: UiState): HTMLElement {
    const bar = el("div", "controls");
    for (const [label, method] of CONTROL_BUTTONS) {
      const button = el("button", "control") as HTMLButtonElement;
      button.textContent = label;
      button.disabled = !this.client.isLegal(method);
      button.onclick = () => {
        if (method === "run" && state.selectedSource !== null) {
          this.client.requestIfLegal("run", { source: state.selectedSource });
        } else if (method !== "run") {
          this.client.requestIfLegal(method);
        }
      };
      bar.append(button);
    }
    const status = el("span", "status");
    status.textContent = `${state.connection} / ${state.run.kind}`;
    bar.append(status);
    return bar;
  }

  private renderSourceList(state: UiState): HTMLElement {
    const pane = el("ul", "sources");
    for (const source of state.sources) {
      const item = el("li",
                      source.name === state.selectedSource ? "selected" : "");
      item.textContent = source.name;
      item.onclick = () => {
        this.client.local({ type: "select-source", name: source.name });
        if (!(source.name in state.texts)) {
          this.client.requestIfLegal("source.get", { name: source.name });
        }
      };
      pane.append(item);
    }
    return pane;
  }

  private renderSource(state: UiState): HTMLElement {
    const pane = el("div", "source");
    const name = state.selectedSource;
    const text = name !== null ? state.texts[name] : undefined;
    if (name === null || text === undefined) {
      pane.textContent = "no source selected";
      return pane;
    }
    const location = currentLocation(state);
    const lines = text.replace(/\n$/, "").split("\n");
    lines.forEach((content, index) => {
      const line = index + 1;
      const row = el("div", "line");
      if (location !== null && location.source === name
          && location.line === line) {
        row.classList.add("current");
      }
      const gutter = el("span", "gutter");
      const bp = state.breakpoints.find(
        (b) => b.source === name && b.line === line);
      gutter.textContent = bp ? (bp.resolved ? "●" : "○") : String(line);
      gutter.onclick = () => this.toggleBreakpoint(state, name, line, null);
      gutter.oncontextmenu = (event) => {
        event.preventDefault();
        const condition = window.prompt("breakpoint condition", "") ?? "";
        this.toggleBreakpoint(state, name, line, condition || null);
      };
      const code = el("span", "code");
      code.textContent = content;
      row.append(gutter, code);
      pane.append(row);
    });
    return pane;
  }

  private toggleBreakpoint(state: UiState, source: string, line: number,
                           condition: string | null): void {
    const existing = state.breakpoints.find(
      (b) => b.source === source && b.line === line);
    if (existing) {
      this.client.requestIfLegal("bp.remove", { id: existing.id });
    } else {
      const params: Record<string, unknown> = { source, line };
      if (condition !== null) {
        params.condition = condition;
      }
      this.client.requestIfLegal("bp.set", params);
    }
  }

  private renderStack(state: UiState): HTMLElement {
    const pane = el("ul", "stack");
    if (state.run.kind !== "suspended") {
      return pane;
    }
    state.run.stack.forEach((frame, index) => {
      const item = el("li", index === activeFrame(state) ? "selected" : "");
      const where = frame.source !== undefined
        ? ` at ${frame.source}:${frame.line}` : "";
      item.textContent = `#${index} ${frame.name}${where}`;
      item.onclick = () => {
        this.client.local({ type: "select-frame", index });
        this.client.requestIfLegal("scopes", { frameIndex: index });
      };
      pane.append(item);
    });
    return pane;
  }

  private renderVariables(state: UiState): HTMLElement {
    const pane = el("dl", "variables");
    for (const scope of state.scopes ?? []) {
      for (const variable of scope.variables) {
        const name = el("dt");
        name.textContent = variable.name;
        const value = el("dd");
        value.textContent = variable.value;
        pane.append(name, value);
      }
    }
    return pane;
  }

  private renderConsole(state: UiState): HTMLElement {
    const pane = el("div", "console");
    const log = el("pre", "log");
    log.textContent = state.console
      .map((entry) => `[${entry.kind}] ${entry.text.replace(/\n$/, "")}`)
      .join("\n");
    const input = el("input", "eval") as HTMLInputElement;
    input.placeholder = "eval in selected frame";
    input.onkeydown = (event) => {
      if (event.key === "Enter" && input.value.trim() !== "") {
        this.client.requestIfLegal("eval", {
          frameIndex: activeFrame(state),
          text: input.value,
        });
        input.value = "";
      }
    };
    input.disabled = !this.client.isLegal("eval");
    pane.append(log, input);
    return pane;
  }
}

function activeFrame(state: UiState): number {
  return state.run.kind === "suspended" ? state.run.activeFrame : 0;
}

function el(tag: string, className = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className !== "") {
    node.className = className;
  }
  return node;
}
