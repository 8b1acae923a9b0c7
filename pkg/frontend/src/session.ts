/**
 * Websocket session: frames in, snapshots out, commands back.
 *
 * Works against any WHATWG-style socket (browser WebSocket, or the ws
 * package in tests) through an injected factory. Reconnects with a fixed
 * delay until close() is called. Every applied command is also recorded
 * client-side with the tick of the latest snapshot seen, in the same
 * JSON-lines shape the engine's replay tool reads.
 */

import {
  Command,
  FrameDecoder,
  ProtocolError,
  Snapshot,
  TAG_ERROR,
  TAG_SNAPSHOT,
  commandFrame,
  decodeError,
  decodeSnapshot,
} from "./protocol.js";

export interface SocketLike {
  binaryType: string;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: Uint8Array): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface SessionEvents {
  onSnapshot?: (snap: Snapshot) => void;
  onServerError?: (message: string) => void;
  onStatus?: (status: "connecting" | "open" | "closed") => void;
  onProtocolError?: (err: ProtocolError) => void;
}

export interface LogEntry {
  at_tick: number;
  command: Command;
}

export class PlayerSession {
  readonly commandLog: LogEntry[] = [];
  lastTick = -1;
  private socket: SocketLike | null = null;
  private decoder = new FrameDecoder();
  private closed = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly events: SessionEvents,
    private readonly factory: SocketFactory,
    private readonly reconnectDelayMs = 1000,
  ) {}

  connect(): void {
    if (this.closed) {
      return;
    }
    this.events.onStatus?.("connecting");
    this.decoder = new FrameDecoder();
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.binaryType = "arraybuffer";
    socket.onopen = () => this.events.onStatus?.("open");
    socket.onmessage = (ev) => this.receive(ev.data);
    socket.onerror = () => {
      // the close handler owns reconnection
    };
    socket.onclose = () => {
      this.socket = null;
      this.events.onStatus?.("closed");
      if (!this.closed) {
        this.reconnectTimer = setTimeout(
          () => this.connect(),
          this.reconnectDelayMs,
        );
      }
    };
  }

  private receive(data: unknown): void {
    let bytes: Uint8Array;
    if (data instanceof ArrayBuffer) {
      bytes = new Uint8Array(data);
    } else if (data instanceof Uint8Array) {
      bytes = data;
    } else {
      this.events.onProtocolError?.(
        new ProtocolError("expected a binary websocket message"),
      );
      return;
    }
    let frames;
    try {
      frames = this.decoder.push(bytes);
    } catch (err) {
      this.events.onProtocolError?.(err as ProtocolError);
      this.socket?.close();
      return;
    }
    for (const frame of frames) {
      try {
        if (frame.tag === TAG_SNAPSHOT) {
          const snap = decodeSnapshot(frame.payload);
          this.lastTick = snap.tick;
          this.events.onSnapshot?.(snap);
        } else if (frame.tag === TAG_ERROR) {
          this.events.onServerError?.(decodeError(frame.payload));
        } else {
          throw new ProtocolError(`unexpected frame tag ${frame.tag}`);
        }
      } catch (err) {
        this.events.onProtocolError?.(err as ProtocolError);
      }
    }
  }

  /** Send a command and record it against the latest seen tick. */
  send(cmd: Command): boolean {
    if (this.socket === null) {
      return false;
    }
    this.socket.send(commandFrame(cmd));
    this.commandLog.push({ at_tick: Math.max(0, this.lastTick), command: cmd });
    return true;
  }

  /** The recorded command log as replay-compatible JSON lines. */
  logText(): string {
    return this.commandLog
      .map((entry) => JSON.stringify(entry) + "\n")
      .join("");
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.socket?.close();
    this.socket = null;
  }
}
