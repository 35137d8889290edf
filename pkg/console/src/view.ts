/** Pure view model: a function of ConsoleState with no side effects. */

import {
  CHANNELS,
  RATING_FACES,
  type ChannelName,
  type SignalPoint,
} from "./types.js";
import { STALE_AFTER_MS, type ConsoleState } from "./state.js";

export interface StripView {
  channel: ChannelName;
  points: SignalPoint[];
  latest: number | null;
  stale: boolean; // no fresh data in the last 10 s
}

export interface ViewModel {
  connected: boolean;
  banner: string | null;
  phaseLabel: string;
  phaseNumber: number | null;
  elapsedS: number | null;
  countdownS: number | null; // vs nominal duration; null when unbounded
  gateBanner: string | null;
  advanceEnabled: boolean;
  ratingButtons: { value: number; label: string }[] | null;
  strips: StripView[];
  markerLog: string[]; // newest last
  done: boolean;
}

const STRIP_LABELS: Record<ChannelName, string> = {
  hr: "HR (bpm)",
  gsr: "GSR (raw)",
  tvoc: "TVOC (ppb)",
  gas320: "Gas320 (kOhm)",
  resp: "Respiration (bpm)",
};

export function renderSession(state: ConsoleState): ViewModel {
  const snap = state.snapshot;
  if (state.connection !== "connected" || snap === null) {
    return {
      connected: false,
      banner: "DISCONNECTED - live view unavailable",
      phaseLabel: "-",
      phaseNumber: null,
      elapsedS: null,
      countdownS: null,
      gateBanner: null,
      advanceEnabled: false,
      ratingButtons: null,
      strips: CHANNELS.map((channel) => ({
        channel,
        points: state.buffers[channel] ?? [],
        latest: null,
        stale: true,
      })),
      markerLog: [],
      done: false,
    };
  }

  const elapsedS = Math.floor(snap.phase_elapsed_ms / 1000);
  const countdownS =
    snap.nominal_duration_s === null ? null : snap.nominal_duration_s - elapsedS;
  const pending = snap.pending_rating;
  const strips: StripView[] = CHANNELS.map((channel) => {
    const points = state.buffers[channel] ?? [];
    const last = points[points.length - 1];
    return {
      channel,
      points,
      latest: last === undefined ? null : last[1],
      stale: last === undefined || snap.now_ms - last[0] > STALE_AFTER_MS,
    };
  });
  return {
    connected: true,
    banner: snap.done ? "Session complete - archive written" : null,
    phaseLabel: `Phase ${snap.phase}: ${snap.phase_name}`,
    phaseNumber: snap.phase,
    elapsedS,
    countdownS,
    gateBanner: pending ? `Rating ${pending} required before advancing` : null,
    advanceEnabled: !snap.done && pending === null,
    ratingButtons: pending ? RATING_FACES : null,
    strips,
    markerLog: snap.markers.map(([t, name]) => `${(t / 1000).toFixed(1)}s ${name}`),
    done: snap.done,
  };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Deterministic HTML for the view model (string render; DOM-free). */
export function renderHtml(vm: ViewModel): string {
  const parts: string[] = [];
  if (vm.banner) parts.push(`<div class="banner">${esc(vm.banner)}</div>`);
  parts.push(`<h1>${esc(vm.phaseLabel)}</h1>`);
  if (vm.countdownS !== null) {
    parts.push(`<div class="countdown">${vm.countdownS}s remaining of nominal</div>`);
  } else if (vm.elapsedS !== null) {
    parts.push(`<div class="countdown">${vm.elapsedS}s elapsed (operator-terminated)</div>`);
  }
  if (vm.gateBanner) parts.push(`<div class="gate">${esc(vm.gateBanner)}</div>`);
  parts.push(
    `<button id="advance"${vm.advanceEnabled ? "" : " disabled"}>Advance phase</button>`,
  );
  if (vm.ratingButtons) {
    const buttons = vm.ratingButtons
      .map((b) => `<button class="face" data-value="${b.value}">${b.value} ${esc(b.label)}</button>`)
      .join("");
    parts.push(`<div class="faces">${buttons}</div>`);
  }
  for (const strip of vm.strips) {
    const latest = strip.latest === null ? "-" : String(strip.latest);
    const stale = strip.stale ? ` <span class="stale">STALE</span>` : "";
    parts.push(
      `<div class="strip" data-channel="${strip.channel}">` +
        `${esc(STRIP_LABELS[strip.channel])}: ${latest} (${strip.points.length} pts)${stale}</div>`,
    );
  }
  parts.push(
    `<ol class="markers">${vm.markerLog.map((m) => `<li>${esc(m)}</li>`).join("")}</ol>`,
  );
  return parts.join("\n");
}
