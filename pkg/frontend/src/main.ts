/**
 * Player entry point: canvas, status line, input wiring.
 *
 * Connects to the session server (ws://host:8765 by default, override
 * with ?ws=...), renders every snapshot, and forwards keys and pointer
 * gestures as commands.
 */

import { keyToCommand, pointerDown, pointerMove, pointerUp } from "./input.js";
import { Snapshot } from "./protocol.js";
import { draw } from "./render.js";
import { PlayerSession, SocketLike } from "./session.js";
import { DEFAULT_BOX, ViewTransform } from "./view.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const status = document.getElementById("status") as HTMLElement;
const ctx = canvas.getContext("2d")!;

let vt = new ViewTransform(DEFAULT_BOX, canvas.width, canvas.height);
let lastSnapshot: Snapshot | null = null;
let dragging = false;

function resize(): void {
  const dpr = window.devicePixelRatio || 1;
  canvas.width = Math.floor(canvas.clientWidth * dpr);
  canvas.height = Math.floor(canvas.clientHeight * dpr);
  ctx.setTransform(1, 0, 0, 1, 0, 0);
  vt = new ViewTransform(DEFAULT_BOX, canvas.width, canvas.height);
  if (lastSnapshot !== null) {
    draw(ctx, lastSnapshot, vt);
  }
}

function canvasPx(ev: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const dpr = canvas.width / rect.width;
  return [(ev.clientX - rect.left) * dpr, (ev.clientY - rect.top) * dpr];
}

const wsUrl =
  new URLSearchParams(window.location.search).get("ws") ??
  `ws://${window.location.hostname || "127.0.0.1"}:8765/`;

const session = new PlayerSession(
  wsUrl,
  {
    onSnapshot: (snap) => {
      lastSnapshot = snap;
      draw(ctx, snap, vt);
    },
    onStatus: (st) => {
      status.textContent = st === "open" ? wsUrl : `${st} (${wsUrl})`;
    },
    onServerError: (message) => {
      status.textContent = `rejected: ${message}`;
    },
    onProtocolError: (err) => {
      status.textContent = `protocol error: ${err.message}`;
    },
  },
  (url) => new WebSocket(url) as unknown as SocketLike,
);

window.addEventListener("keydown", (ev) => {
  const cmd = keyToCommand(ev.key);
  if (cmd !== null) {
    session.send(cmd);
    ev.preventDefault();
  }
});

canvas.addEventListener("pointerdown", (ev) => {
  dragging = true;
  canvas.setPointerCapture(ev.pointerId);
  session.send(pointerDown(vt, ...canvasPx(ev)));
});
canvas.addEventListener("pointermove", (ev) => {
  if (dragging) {
    session.send(pointerMove(vt, ...canvasPx(ev)));
  }
});
window.addEventListener("pointerup", () => {
  if (dragging) {
    dragging = false;
    session.send(pointerUp());
  }
});

window.addEventListener("resize", resize);
resize();
session.connect();
