/** Service client with pending-action locks.
 *
 * A mutation is never issued while its lock is held, so double-clicks cannot
 * produce duplicate POSTs; the service remains the source of truth and its
 * errors are surfaced verbatim.
 */

import type { Checkpoint, ServiceError, SessionSnapshot } from "./types.js";

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ServiceRejection extends Error {
  constructor(
    public readonly payload: ServiceError,
    public readonly status: number,
  ) {
    super(payload.detail ?? payload.error);
  }
}

export class LockHeld extends Error {
  constructor(name: string) {
    super(`action '${name}' already in flight`);
  }
}

export interface Participant {
  id: string;
  age?: number;
  gender?: string;
  confounds?: Record<string, string>;
}

export class ServiceClient {
  private locks = { advance: false, rating: false };

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  lockState(): { advance: boolean; rating: boolean } {
    return { ...this.locks };
  }

  private async post(path: string, body?: unknown): Promise<unknown> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await res.json()) as Record<string, unknown>;
    if (!res.ok) {
      throw new ServiceRejection(payload as unknown as ServiceError, res.status);
    }
    return payload;
  }

  async startSession(participant: Participant): Promise<string> {
    const out = (await this.post("/session", { participant })) as { session_id: string };
    return out.session_id;
  }

  async getState(sessionId: string): Promise<SessionSnapshot> {
    const res = await this.fetchImpl(`${this.baseUrl}/session/${sessionId}/state`);
    const payload = (await res.json()) as Record<string, unknown>;
    if (!res.ok) throw new ServiceRejection(payload as unknown as ServiceError, res.status);
    return payload as unknown as SessionSnapshot;
  }

  /** Advance the protocol; rejects immediately if an advance is in flight. */
  async advance(sessionId: string): Promise<SessionSnapshot> {
    if (this.locks.advance) throw new LockHeld("advance");
    this.locks.advance = true;
    try {
      return (await this.post(`/session/${sessionId}/advance`)) as unknown as SessionSnapshot;
    } finally {
      this.locks.advance = false;
    }
  }

  /** Submit a momentary stress rating (1..6) for the pending checkpoint. */
  async submitRating(
    sessionId: string,
    checkpoint: Checkpoint,
    value: number,
  ): Promise<SessionSnapshot> {
    if (this.locks.rating) throw new LockHeld("rating");
    this.locks.rating = true;
    try {
      return (await this.post(`/session/${sessionId}/rating`, {
        checkpoint,
        value,
      })) as unknown as SessionSnapshot;
    } finally {
      this.locks.rating = false;
    }
  }
}
