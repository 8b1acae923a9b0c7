/**
 * World/canvas coordinate transform.
 *
 * The engine simulates inside a fixed view box (y up); the canvas is
 * pixels (y down). The transform letterboxes the box into the canvas,
 * preserving aspect, centered both ways.
 */

export interface Box {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

/** The engine's default view box; decks do not override it. */
export const DEFAULT_BOX: Box = { minX: -2, minY: -1.5, maxX: 2, maxY: 1.5 };

export class ViewTransform {
  readonly scale: number;
  private readonly cxWorld: number;
  private readonly cyWorld: number;
  private readonly cxPx: number;
  private readonly cyPx: number;

  constructor(
    readonly box: Box,
    readonly widthPx: number,
    readonly heightPx: number,
  ) {
    if (!(widthPx > 0) || !(heightPx > 0)) {
      throw new Error("canvas size must be positive");
    }
    const boxW = box.maxX - box.minX;
    const boxH = box.maxY - box.minY;
    if (!(boxW > 0) || !(boxH > 0)) {
      throw new Error("view box must have positive extent");
    }
    this.scale = Math.min(widthPx / boxW, heightPx / boxH);
    this.cxWorld = (box.minX + box.maxX) / 2;
    this.cyWorld = (box.minY + box.maxY) / 2;
    this.cxPx = widthPx / 2;
    this.cyPx = heightPx / 2;
  }

  toPx(wx: number, wy: number): [number, number] {
    return [
      this.cxPx + (wx - this.cxWorld) * this.scale,
      this.cyPx - (wy - this.cyWorld) * this.scale,
    ];
  }

  toWorld(px: number, py: number): [number, number] {
    return [
      this.cxWorld + (px - this.cxPx) / this.scale,
      this.cyWorld - (py - this.cyPx) / this.scale,
    ];
  }

  /** Pixel rectangle the view box maps onto (the letterboxed area). */
  boxRectPx(): { x: number; y: number; w: number; h: number } {
    const [x0, y1] = this.toPx(this.box.minX, this.box.minY);
    const [x1, y0] = this.toPx(this.box.maxX, this.box.maxY);
    return { x: x0, y: y0, w: x1 - x0, h: y1 - y0 };
  }
}
