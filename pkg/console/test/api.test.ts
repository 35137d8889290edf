import { describe, expect, it } from "vitest";

import { LockHeld, ServiceClient, ServiceRejection, type FetchLike } from "../src/api.js";

function deferredFetch() {
  const calls: { url: string; body?: string }[] = [];
  let release: (() => void) | null = null;
  const gate = new Promise<void>((resolve) => {
    release = resolve;
  });
  const fetchImpl: FetchLike = async (url, init) => {
    calls.push({ url, body: init?.body });
    await gate;
    return { ok: true, status: 200, json: async () => ({ ok: true }) };
  };
  return { fetchImpl, calls, release: () => release!() };
}

describe("pending-action locks", () => {
  it("a second advance while one is in flight never reaches the wire", async () => {
    const { fetchImpl, calls, release } = deferredFetch();
    const client = new ServiceClient("http://x", fetchImpl);
    const first = client.advance("s1");
    expect(client.lockState().advance).toBe(true);
    await expect(client.advance("s1")).rejects.toBeInstanceOf(LockHeld);
    expect(calls.length).toBe(1);
    release();
    await first;
    expect(client.lockState().advance).toBe(false);
  });

  it("rating lock releases after both success and failure", async () => {
    let fail = true;
    const fetchImpl: FetchLike = async () => {
      if (fail) {
        return {
          ok: false,
          status: 400,
          json: async () => ({ error: "WrongCheckpoint", detail: "checkpoint T2 not pending" }),
        };
      }
      return { ok: true, status: 200, json: async () => ({ pending_rating: null }) };
    };
    const client = new ServiceClient("http://x", fetchImpl);
    await expect(client.submitRating("s1", "T2", 3)).rejects.toBeInstanceOf(ServiceRejection);
    expect(client.lockState().rating).toBe(false);
    fail = false;
    await client.submitRating("s1", "T1", 3);
    expect(client.lockState().rating).toBe(false);
  });

  it("service errors surface verbatim", async () => {
    const fetchImpl: FetchLike = async () => ({
      ok: false,
      status: 409,
      json: async () => ({ error: "RatingGate", detail: "rating T1 required", missing: "T1" }),
    });
    const client = new ServiceClient("http://x", fetchImpl);
    try {
      await client.advance("s1");
      expect.unreachable();
    } catch (err) {
      const rej = err as ServiceRejection;
      expect(rej).toBeInstanceOf(ServiceRejection);
      expect(rej.status).toBe(409);
      expect(rej.payload.error).toBe("RatingGate");
      expect(rej.payload.missing).toBe("T1");
    }
  });

  it("a dropped connection rejects without fabricating state", async () => {
    const fetchImpl: FetchLike = async () => {
      throw new Error("network down");
    };
    const client = new ServiceClient("http://x", fetchImpl);
    await expect(client.submitRating("s1", "T1", 4)).rejects.toThrow("network down");
    expect(client.lockState().rating).toBe(false);
  });
});
