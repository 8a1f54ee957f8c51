import type { Label, StrokeDelta } from "./types.js";

/**
 * Brush-path rasterization in full-resolution pixel coordinates.
 *
 * Screen points are mapped through the display zoom before rasterizing, so
 * painting at 50% or 200% produces exactly the deltas painting at 100%
 * would. Deltas inside one stroke are deduplicated.
 */
export class BrushEngine {
  radius = 1;
  label: Label = "A";
  erase = false;

  /** Map a screen-space point to integer full-resolution coordinates. */
  toFullRes(sx: number, sy: number, zoom: number): { x: number; y: number } {
    return { x: Math.round(sx / zoom), y: Math.round(sy / zoom) };
  }

  /** Pixels of a brush dot: a disk of the configured radius. */
  dotPixels(cx: number, cy: number): Array<{ x: number; y: number }> {
    const r = Math.max(1, this.radius) - 1;
    const out: Array<{ x: number; y: number }> = [];
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        if (dx * dx + dy * dy <= r * r) {
          out.push({ x: cx + dx, y: cy + dy });
        }
      }
    }
    return out;
  }

  /**
   * Rasterize a dragged path (screen coordinates at the given zoom) into
   * stroke deltas, walking each segment so no pixel is skipped.
   */
  rasterizePath(
    screenPoints: Array<{ x: number; y: number }>,
    zoom: number,
    width: number,
    height: number,
  ): StrokeDelta[] {
    const seen = new Set<number>();
    const deltas: StrokeDelta[] = [];
    const push = (x: number, y: number) => {
      for (const p of this.dotPixels(x, y)) {
        if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) continue;
        const key = p.y * width + p.x;
        if (seen.has(key)) continue;
        seen.add(key);
        deltas.push({ x: p.x, y: p.y, label: this.label, ...(this.erase ? { erase: true } : {}) });
      }
    };
    const pts = screenPoints.map((p) => this.toFullRes(p.x, p.y, zoom));
    if (pts.length === 0) return deltas;
    push(pts[0].x, pts[0].y);
    for (let i = 1; i < pts.length; i++) {
      const a = pts[i - 1];
      const b = pts[i];
      const steps = Math.max(Math.abs(b.x - a.x), Math.abs(b.y - a.y));
      for (let s = 1; s <= steps; s++) {
        push(
          Math.round(a.x + ((b.x - a.x) * s) / steps),
          Math.round(a.y + ((b.y - a.y) * s) / steps),
        );
      }
    }
    return deltas;
  }
}

/** Per-frame undo stacks over delta groups. */
export class UndoStack {
  private byFrame = new Map<number, StrokeDelta[][]>();

  push(frame: number, deltas: StrokeDelta[]): void {
    if (!deltas.length) return;
    const stack = this.byFrame.get(frame) ?? [];
    stack.push(deltas);
    this.byFrame.set(frame, stack);
  }

  /** Deltas that revert the most recent group on this frame. */
  pop(frame: number): StrokeDelta[] | null {
    const stack = this.byFrame.get(frame);
    const group = stack?.pop();
    if (!group) return null;
    return group.map((d) =>
      d.erase ? { x: d.x, y: d.y, label: d.label } : { x: d.x, y: d.y, label: d.label, erase: true },
    );
  }

  depth(frame: number): number {
    return this.byFrame.get(frame)?.length ?? 0;
  }
}
