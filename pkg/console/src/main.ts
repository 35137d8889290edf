/** Browser bootstrap: wires the state cell, stream and buttons to the DOM. */

import { LockHeld, ServiceClient, ServiceRejection } from "./api.js";
import { initialState, type ConsoleState } from "./state.js";
import { connectStream } from "./stream.js";
import { renderHtml, renderSession } from "./view.js";
import type { Checkpoint } from "./types.js";

function toast(text: string): void {
  const el = document.getElementById("toast");
  if (el) {
    el.textContent = text;
    el.classList.add("visible");
    setTimeout(() => el.classList.remove("visible"), 4000);
  }
}

export function boot(): void {
  const base = `${window.location.protocol}//${window.location.host}`;
  const client = new ServiceClient(base);
  let state: ConsoleState = initialState();
  let sessionId: string | null = null;

  const root = document.getElementById("console-root");
  const render = () => {
    if (root) root.innerHTML = renderHtml(renderSession(state));
    bindButtons();
  };
  const setState = (s: ConsoleState) => {
    state = s;
    render();
  };

  function bindButtons(): void {
    const advance = document.getElementById("advance");
    if (advance && sessionId) {
      advance.onclick = () => {
        client.advance(sessionId!).catch((err) => {
          if (err instanceof ServiceRejection) toast(err.message);
          else if (err instanceof LockHeld) {
            /* in flight: ignore the duplicate click */
          } else toast("connection lost - retry");
        });
      };
    }
    for (const btn of Array.from(document.querySelectorAll("button.face"))) {
      (btn as HTMLButtonElement).onclick = () => {
        const value = Number((btn as HTMLButtonElement).dataset.value);
        const pending = state.snapshot?.pending_rating;
        if (!sessionId || !pending) return;
        client.submitRating(sessionId, pending as Checkpoint, value).catch((err) => {
          if (err instanceof ServiceRejection) toast(err.message);
          else if (!(err instanceof LockHeld)) toast("submit failed - retry");
        });
      };
    }
  }

  const startBtn = document.getElementById("start");
  if (startBtn) {
    startBtn.onclick = async () => {
      const idInput = document.getElementById("participant-id") as HTMLInputElement | null;
      const pid = idInput?.value || "P00";
      try {
        sessionId = await client.startSession({ id: pid });
        const wsProto = window.location.protocol === "https:" ? "wss" : "ws";
        connectStream(
          `${wsProto}://${window.location.host}/session/${sessionId}/stream`,
          (url) => new WebSocket(url) as unknown as import("./stream.js").SocketLike,
          () => state,
          setState,
        );
      } catch (err) {
        toast(err instanceof Error ? err.message : "failed to start session");
      }
    };
  }
  render();
}

if (typeof document !== "undefined" && document.getElementById("console-root")) {
  boot();
}
