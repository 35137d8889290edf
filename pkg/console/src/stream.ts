/** Snapshot stream consumption over a WebSocket-like channel. */

import { applyMessage, markDisconnected, type ConsoleState } from "./state.js";
import type { StreamMessage } from "./types.js";

export interface SocketLike {
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((ev: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

/** Attach a stream to a state cell; returns a detach function. */
export function connectStream(
  url: string,
  factory: SocketFactory,
  getState: () => ConsoleState,
  setState: (s: ConsoleState) => void,
): () => void {
  const socket = factory(url);
  socket.onmessage = (ev) => {
    let msg: StreamMessage;
    try {
      msg = JSON.parse(ev.data) as StreamMessage;
    } catch {
      return; // malformed frame: ignore, keep the connection
    }
    setState(applyMessage(getState(), msg));
  };
  socket.onclose = () => setState(markDisconnected(getState()));
  socket.onerror = () => setState(markDisconnected(getState()));
  return () => socket.close();
}
