/**
 * Wire protocol mirror: framed byte stream plus canonical JSON payloads.
 *
 * A frame is a big-endian u32 length, one tag byte, then the payload; the
 * length counts the tag byte plus the payload, so it is at least 1. The
 * engine sends S (snapshot) and E (error) frames and accepts C (command)
 * frames. Snapshots arrive as canonical JSON, one per tick.
 */

export const TAG_SNAPSHOT = 0x53; // "S"
export const TAG_COMMAND = 0x43; // "C"
export const TAG_ERROR = 0x45; // "E"
export const MAX_FRAME_BYTES = 16 * 1024 * 1024;

const KNOWN_TAGS = new Set([TAG_SNAPSHOT, TAG_COMMAND, TAG_ERROR]);

export class ProtocolError extends Error {}

export interface Frame {
  tag: number;
  payload: Uint8Array;
}

export function encodeFrame(tag: number, payload: Uint8Array): Uint8Array {
  if (!KNOWN_TAGS.has(tag)) {
    throw new ProtocolError(`unknown frame tag ${tag}`);
  }
  if (1 + payload.byteLength > MAX_FRAME_BYTES) {
    throw new ProtocolError("frame too large");
  }
  const out = new Uint8Array(5 + payload.byteLength);
  new DataView(out.buffer).setUint32(0, 1 + payload.byteLength, false);
  out[4] = tag;
  out.set(payload, 5);
  return out;
}

/** Incremental frame parser; chunk boundaries need not align with frames. */
export class FrameDecoder {
  private pending = new Uint8Array(0);

  push(chunk: Uint8Array): Frame[] {
    const joined = new Uint8Array(this.pending.byteLength + chunk.byteLength);
    joined.set(this.pending, 0);
    joined.set(chunk, this.pending.byteLength);
    this.pending = joined;

    const frames: Frame[] = [];
    for (;;) {
      if (this.pending.byteLength < 4) {
        return frames;
      }
      const view = new DataView(
        this.pending.buffer,
        this.pending.byteOffset,
        this.pending.byteLength,
      );
      const length = view.getUint32(0, false);
      if (length === 0) {
        throw new ProtocolError("empty frame");
      }
      if (length > MAX_FRAME_BYTES) {
        throw new ProtocolError(
          `frame of ${length} bytes exceeds the ${MAX_FRAME_BYTES} byte limit`,
        );
      }
      if (this.pending.byteLength < 4 + length) {
        return frames;
      }
      const tag = this.pending[4]!;
      if (!KNOWN_TAGS.has(tag)) {
        throw new ProtocolError(`unknown frame tag ${tag}`);
      }
      frames.push({ tag, payload: this.pending.slice(5, 4 + length) });
      this.pending = this.pending.slice(4 + length);
    }
  }

  /** Bytes buffered but not yet forming a complete frame. */
  pendingBytes(): number {
    return this.pending.byteLength;
  }
}

// ---------------------------------------------------------------------------
// Snapshots

export interface TidgetView {
  anchor: string;
  lines: string[];
}

export interface BodyView {
  pos: [number, number][];
  springs: [number, number][];
  stretch: number[];
}

export interface DragView {
  body: number;
  particle: number;
  target: [number, number];
}

export interface Snapshot {
  tick: number;
  slide: number;
  title: string;
  tidgets: TidgetView[];
  bodies: BodyView[];
  drag: DragView | null;
  integrator: string | null;
  running: boolean;
}

const decoder = new TextDecoder("utf-8", { fatal: true });
const encoder = new TextEncoder();

function need(obj: Record<string, unknown>, key: string, kind: string): unknown {
  const value = obj[key];
  if (value === undefined) {
    throw new ProtocolError(`snapshot: missing key ${key}`);
  }
  if (kind === "number" && typeof value !== "number") {
    throw new ProtocolError(`snapshot: ${key} must be a number`);
  }
  if (kind === "string" && typeof value !== "string") {
    throw new ProtocolError(`snapshot: ${key} must be a string`);
  }
  if (kind === "array" && !Array.isArray(value)) {
    throw new ProtocolError(`snapshot: ${key} must be an array`);
  }
  return value;
}

function pair(value: unknown, what: string): [number, number] {
  if (
    !Array.isArray(value) ||
    value.length !== 2 ||
    typeof value[0] !== "number" ||
    typeof value[1] !== "number"
  ) {
    throw new ProtocolError(`snapshot: ${what} must be a pair of numbers`);
  }
  return [value[0], value[1]];
}

export function decodeSnapshot(payload: Uint8Array): Snapshot {
  let obj: unknown;
  try {
    obj = JSON.parse(decoder.decode(payload));
  } catch (err) {
    throw new ProtocolError(`snapshot: ${(err as Error).message}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new ProtocolError("snapshot: expected a JSON object");
  }
  const o = obj as Record<string, unknown>;
  const bodies: BodyView[] = [];
  for (const raw of need(o, "bodies", "array") as unknown[]) {
    const b = raw as Record<string, unknown>;
    bodies.push({
      pos: (need(b, "pos", "array") as unknown[]).map((p) => pair(p, "pos")),
      springs: (need(b, "springs", "array") as unknown[]).map((s) =>
        pair(s, "springs"),
      ),
      stretch: (need(b, "stretch", "array") as unknown[]).map((s) => {
        if (typeof s !== "number") {
          throw new ProtocolError("snapshot: stretch must be numeric");
        }
        return s;
      }),
    });
  }
  const tidgets: TidgetView[] = [];
  for (const raw of need(o, "tidgets", "array") as unknown[]) {
    const t = raw as Record<string, unknown>;
    tidgets.push({
      anchor: need(t, "anchor", "string") as string,
      lines: (need(t, "lines", "array") as unknown[]).map((line) => {
        if (typeof line !== "string") {
          throw new ProtocolError("snapshot: tidget lines must be strings");
        }
        return line;
      }),
    });
  }
  let drag: DragView | null = null;
  if (o["drag"] !== null && o["drag"] !== undefined) {
    const d = o["drag"] as Record<string, unknown>;
    drag = {
      body: need(d, "body", "number") as number,
      particle: need(d, "particle", "number") as number,
      target: pair(need(d, "target", "array"), "drag target"),
    };
  }
  const integrator = o["integrator"];
  if (integrator !== null && typeof integrator !== "string") {
    throw new ProtocolError("snapshot: integrator must be a string or null");
  }
  if (typeof o["running"] !== "boolean") {
    throw new ProtocolError("snapshot: running must be a boolean");
  }
  return {
    tick: need(o, "tick", "number") as number,
    slide: need(o, "slide", "number") as number,
    title: need(o, "title", "string") as string,
    tidgets,
    bodies,
    drag,
    integrator: integrator as string | null,
    running: o["running"],
  };
}

export function decodeError(payload: Uint8Array): string {
  try {
    const obj = JSON.parse(decoder.decode(payload));
    if (typeof obj === "object" && obj !== null && typeof obj.error === "string") {
      return obj.error;
    }
  } catch {
    // fall through
  }
  return "malformed error frame";
}

// ---------------------------------------------------------------------------
// Commands

export type Command =
  | { cmd: "navigate"; action: "next" | "prev" | "home" | "end" }
  | { cmd: "navigate"; action: "goto"; index: number }
  | { cmd: "key"; code: string }
  | { cmd: "pointer_down"; x: number; y: number }
  | { cmd: "pointer_move"; x: number; y: number }
  | { cmd: "pointer_up" }
  | { cmd: "set_integrator"; name: string }
  | { cmd: "set_param"; path: string; value: number }
  | { cmd: "reset" }
  | { cmd: "pause" }
  | { cmd: "run" };

/**
 * Commands serialize with the same key order the engine uses, compact
 * separators, raw UTF-8. The engine canonicalizes floats on its side, so
 * the only obligation here is emitting valid, finite JSON numbers.
 */
export function encodeCommand(cmd: Command): Uint8Array {
  for (const value of Object.values(cmd)) {
    if (typeof value === "number" && !Number.isFinite(value)) {
      throw new ProtocolError("command: numbers must be finite");
    }
  }
  return encoder.encode(JSON.stringify(cmd));
}

export function commandFrame(cmd: Command): Uint8Array {
  return encodeFrame(TAG_COMMAND, encodeCommand(cmd));
}
