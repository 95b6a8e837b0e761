/**
 * Bootstrap: connect to the debug server on the serving host, then list and
 * fetch sources so the panes have something to show.
 */

import { DebugClient } from "./client.js";
import { DebuggerView } from "./ui.js";

function connect(): void {
  const client = new DebugClient();
  const root = document.getElementById("app");
  if (root === null) {
    throw new Error("missing #app container");
  }
  new DebuggerView(root, client);

  const url = `ws://${window.location.host}/debug`;
  const socket = new WebSocket(url);
  socket.onopen = () => {
    client.attach({
      send: (text) => socket.send(text),
      close: () => socket.close(),
    });
    client.request("sources.list");
  };
  socket.onmessage = (event) => {
    client.onMessage(String(event.data));
    // fetch text for any source we have not seen yet
    for (const source of client.getState().sources) {
      if (!(source.name in client.getState().texts)) {
        client.requestIfLegal("source.get", { name: source.name });
      }
    }
  };
  socket.onclose = () => client.onClose();
}

connect();
