/** Console state: a mirrored service snapshot plus per-channel ring buffers.
 *
 * The console never transitions protocol state locally; every mutation
 * round-trips through the service. Reducers here are pure, so replaying a
 * recorded stream always reproduces the same state.
 */

import {
  CHANNELS,
  type ChannelName,
  type SessionSnapshot,
  type SignalPoint,
  type StreamMessage,
} from "./types.js";

export const RING_WINDOW_MS = 300_000; // keep the last 300 s per strip
export const DECIMATE_MIN_SPACING_MS = 500; // cap at 2 points/s client-side
export const STALE_AFTER_MS = 10_000;

export interface ConsoleState {
  snapshot: SessionSnapshot | null;
  buffers: Record<ChannelName, SignalPoint[]>;
  connection: "connected" | "disconnected";
  locks: { advance: boolean; rating: boolean };
  lastError: string | null;
}

export function initialState(): ConsoleState {
  const buffers = {} as Record<ChannelName, SignalPoint[]>;
  for (const ch of CHANNELS) buffers[ch] = [];
  return {
    snapshot: null,
    buffers,
    connection: "disconnected",
    locks: { advance: false, rating: false },
    lastError: null,
  };
}

/** Append points keeping time order, >=500 ms spacing and a 300 s window. */
export function pushPoints(
  buffer: SignalPoint[],
  incoming: SignalPoint[],
  nowMs: number,
): SignalPoint[] {
  const out = buffer.slice();
  for (const [t, v] of incoming) {
    const last = out[out.length - 1];
    if (last !== undefined && t <= last[0]) continue; // keep time order
    if (last !== undefined && t - last[0] < DECIMATE_MIN_SPACING_MS) continue;
    out.push([t, v]);
  }
  const cutoff = nowMs - RING_WINDOW_MS;
  let first = 0;
  while (first < out.length && out[first]![0] < cutoff) first += 1;
  return first > 0 ? out.slice(first) : out;
}

export function applyMessage(state: ConsoleState, msg: StreamMessage): ConsoleState {
  if (msg.type === "error" || !msg.state) {
    return { ...state, connection: "disconnected", lastError: msg.error ?? "stream error" };
  }
  const buffers = { ...state.buffers };
  const now = msg.state.now_ms;
  for (const ch of CHANNELS) {
    const pts = msg.signals?.[ch];
    buffers[ch] = pushPoints(buffers[ch] ?? [], pts ?? [], now);
  }
  return {
    ...state,
    snapshot: msg.state,
    buffers,
    connection: "connected",
    lastError: null,
  };
}

export function markDisconnected(state: ConsoleState): ConsoleState {
  return { ...state, connection: "disconnected" };
}

/** Fold a recorded stream into its final state (used by replay tests). */
export function replayStream(messages: StreamMessage[]): ConsoleState {
  let state = initialState();
  for (const msg of messages) state = applyMessage(state, msg);
  return state;
}
