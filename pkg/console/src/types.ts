/** Wire schema of the session service (mirrors its JSON payloads). */

export type Checkpoint = "T1" | "T2" | "T3";

export interface SessionSnapshot {
  session_id: string;
  phase: number;
  phase_name: string;
  phase_entered_ms: number;
  now_ms: number;
  phase_elapsed_ms: number;
  nominal_duration_s: number | null;
  pending_rating: Checkpoint | null;
  sensor_mode: "idle" | "baseline" | "experiment";
  done: boolean;
  markers: [number, string][];
  ratings: Partial<Record<Checkpoint, number>>;
}

export type ChannelName = "hr" | "gsr" | "tvoc" | "gas320" | "resp";

export const CHANNELS: ChannelName[] = ["hr", "gsr", "tvoc", "gas320", "resp"];

export type SignalPoint = [number, number]; // (t_ms, value)

export interface StreamMessage {
  type: "snapshot" | "error";
  state?: SessionSnapshot;
  signals?: Partial<Record<ChannelName, SignalPoint[]>>;
  error?: string;
}

export interface ServiceError {
  error: string;
  detail?: string;
  missing?: Checkpoint;
}

/** Six-face momentary stress scale, rendered as ordinal buttons 1-6. */
export const RATING_FACES: { value: number; label: string }[] = [
  { value: 1, label: "no stress" },
  { value: 2, label: "slight" },
  { value: 3, label: "mild" },
  { value: 4, label: "moderate" },
  { value: 5, label: "severe" },
  { value: 6, label: "maximum stress" },
];
