import { describe, expect, it } from "vitest";

import { applyMessage, initialState } from "../src/state.js";
import { renderHtml, renderSession } from "../src/view.js";
import type { StreamMessage } from "../src/types.js";
import { snapshot } from "./state.test.js";

function stateWith(msg: StreamMessage) {
  return applyMessage(initialState(), msg);
}

describe("renderSession", () => {
  it("phase 4 at 150/240 shows a 90s countdown", () => {
    const vm = renderSession(
      stateWith({
        type: "snapshot",
        state: snapshot({
          phase: 4,
          phase_name: "Arithmetic",
          phase_entered_ms: 0,
          now_ms: 150_000,
          phase_elapsed_ms: 150_000,
          nominal_duration_s: 240,
        }),
        signals: {},
      }),
    );
    expect(vm.countdownS).toBe(90);
    expect(vm.phaseLabel).toBe("Phase 4: Arithmetic");
  });

  it("pending T2 disables advance and shows the gate banner with faces", () => {
    const vm = renderSession(
      stateWith({
        type: "snapshot",
        state: snapshot({ phase: 3, pending_rating: "T2" }),
        signals: {},
      }),
    );
    expect(vm.advanceEnabled).toBe(false);
    expect(vm.gateBanner).toContain("T2");
    expect(vm.ratingButtons).toHaveLength(6);
    expect(vm.ratingButtons?.[0]).toEqual({ value: 1, label: "no stress" });
    expect(vm.ratingButtons?.[5]).toEqual({ value: 6, label: "maximum stress" });
    const html = renderHtml(vm);
    expect(html).toContain("<button id=\"advance\" disabled>");
    expect(html).toContain("data-value=\"6\"");
  });

  it("marks a strip stale after a 10s data gap", () => {
    const vm = renderSession(
      stateWith({
        type: "snapshot",
        state: snapshot({ now_ms: 95_000 }),
        signals: { hr: [[94_500, 71]], tvoc: [[84_000, 160]] },
      }),
    );
    const byName = Object.fromEntries(vm.strips.map((s) => [s.channel, s]));
    expect(byName.hr!.stale).toBe(false);
    expect(byName.tvoc!.stale).toBe(true); // 11s old
    expect(renderHtml(vm)).toContain("STALE");
  });

  it("warmup has no countdown (operator-terminated)", () => {
    const vm = renderSession(
      stateWith({
        type: "snapshot",
        state: snapshot({ phase: 1, phase_name: "Warmup", nominal_duration_s: null }),
        signals: {},
      }),
    );
    expect(vm.countdownS).toBeNull();
  });

  it("disconnected state renders the banner and disables everything", () => {
    const vm = renderSession(initialState());
    expect(vm.connected).toBe(false);
    expect(vm.banner).toContain("DISCONNECTED");
    expect(vm.advanceEnabled).toBe(false);
    expect(renderHtml(vm)).toContain("DISCONNECTED");
  });

  it("view is a pure function of state", () => {
    const state = stateWith({
      type: "snapshot",
      state: snapshot({ pending_rating: "T1" }),
      signals: { hr: [[89_000, 70]] },
    });
    expect(renderSession(state)).toEqual(renderSession(state));
    expect(renderHtml(renderSession(state))).toBe(renderHtml(renderSession(state)));
  });
});
