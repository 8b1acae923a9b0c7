/**
 * Canvas renderer for snapshots.
 *
 * Springs are colored by stretch (compressed blue, rest gray, stretched
 * red), particles are filled dots, the drag spring is dashed, tidgets
 * render as text blocks in their anchor corner, and a paused or faulted
 * scene gets a banner.
 */

import { BodyView, Snapshot } from "./protocol.js";
import { ViewTransform } from "./view.js";

/** Map a stretch ratio onto a CSS color; 1 is rest length. */
export function stretchColor(stretch: number): string {
  // clamp the visual range to +-30% so springs stay readable
  const t = Math.max(-1, Math.min(1, (stretch - 1) / 0.3));
  if (t >= 0) {
    const other = Math.round(176 * (1 - t));
    return `rgb(204,${other},${other})`;
  }
  const other = Math.round(176 * (1 + t));
  return `rgb(${other},${other},204)`;
}

const ANCHOR_POSITIONS: Record<string, [number, number]> = {
  "top-left": [0, 0],
  "top-right": [1, 0],
  "bottom-left": [0, 1],
  "bottom-right": [1, 1],
};

export function anchorOrigin(
  anchor: string,
  width: number,
  height: number,
  margin: number,
): [number, number, boolean] {
  const [ax, ay] = ANCHOR_POSITIONS[anchor] ?? [0, 0];
  const x = ax === 0 ? margin : width - margin;
  const y = ay === 0 ? margin : height - margin;
  return [x, y, ax === 1];
}

function drawBody(
  ctx: CanvasRenderingContext2D,
  body: BodyView,
  vt: ViewTransform,
): void {
  body.springs.forEach(([a, b], i) => {
    const pa = body.pos[a];
    const pb = body.pos[b];
    if (pa === undefined || pb === undefined) {
      return;
    }
    ctx.strokeStyle = stretchColor(body.stretch[i] ?? 1);
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(...vt.toPx(pa[0], pa[1]));
    ctx.lineTo(...vt.toPx(pb[0], pb[1]));
    ctx.stroke();
  });
  ctx.fillStyle = "#e8e8e8";
  for (const [x, y] of body.pos) {
    const [px, py] = vt.toPx(x, y);
    ctx.beginPath();
    ctx.arc(px, py, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

export function draw(
  ctx: CanvasRenderingContext2D,
  snap: Snapshot,
  vt: ViewTransform,
  tidgetsEnabled = true,
): void {
  const { widthPx: w, heightPx: h } = vt;
  ctx.fillStyle = "#13151a";
  ctx.fillRect(0, 0, w, h);

  const rect = vt.boxRectPx();
  ctx.strokeStyle = "#2c3140";
  ctx.lineWidth = 1;
  ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);

  for (const body of snap.bodies) {
    drawBody(ctx, body, vt);
  }

  if (snap.drag !== null) {
    const body = snap.bodies[snap.drag.body];
    const particle = body?.pos[snap.drag.particle];
    if (particle !== undefined) {
      ctx.strokeStyle = "#d9b44a";
      ctx.setLineDash([4, 4]);
      ctx.beginPath();
      ctx.moveTo(...vt.toPx(particle[0], particle[1]));
      ctx.lineTo(...vt.toPx(snap.drag.target[0], snap.drag.target[1]));
      ctx.stroke();
      ctx.setLineDash([]);
    }
  }

  ctx.fillStyle = "#f0f0f0";
  ctx.font = "bold 28px system-ui, sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "top";
  ctx.fillText(snap.title, w / 2, 18);

  if (tidgetsEnabled) {
    ctx.font = "16px system-ui, sans-serif";
    ctx.textBaseline = "top";
    for (const tidget of snap.tidgets) {
      const [ox, oy, rightAligned] = anchorOrigin(tidget.anchor, w, h, 64);
      ctx.textAlign = rightAligned ? "right" : "left";
      tidget.lines.forEach((line, i) => {
        ctx.fillText(`• ${line}`, ox, oy + i * 24);
      });
    }
  }

  if (!snap.running) {
    ctx.fillStyle = "#d9b44a";
    ctx.font = "14px system-ui, sans-serif";
    ctx.textAlign = "right";
    ctx.fillText("paused", w - 16, h - 28);
  }
  if (snap.integrator !== null) {
    ctx.fillStyle = "#8a93a6";
    ctx.font = "14px system-ui, sans-serif";
    ctx.textAlign = "left";
    ctx.fillText(`${snap.integrator}  tick ${snap.tick}`, 16, h - 28);
  }
}
