/**
 * Temporal-offset dragging: the B thumbnail strip slides against A's, and
 * the horizontal drag distance converts to a whole-frame offset.
 */
export class TimelineModel {
  constructor(
    public aLength: number,
    public bLength: number,
    public thumbWidth = 48,
  ) {}

  /** Offset after dragging B's strip by dragPx from `base`. */
  offsetAfterDrag(base: number, dragPx: number): number {
    return base + Math.round(dragPx / this.thumbWidth);
  }

  /** An offset is usable only if the takes still overlap somewhere. */
  hasOverlap(offset: number): boolean {
    const start = Math.max(0, offset);
    const end = Math.min(this.aLength, this.bLength + offset);
    return end > start;
  }

  /** Clamp an offset to the nearest value that keeps an overlap. */
  clampToOverlap(offset: number): number {
    const min = 1 - this.bLength;
    const max = this.aLength - 1;
    return Math.min(Math.max(offset, min), max);
  }

  /** Frame pairs (aIndex, bIndex) shown side by side at this offset. */
  pairAt(outputIndex: number, offset: number): { a: number | null; b: number | null } {
    const t0 = Math.min(0, offset);
    const t = outputIndex + t0;
    return {
      a: t >= 0 && t < this.aLength ? t : null,
      b: t - offset >= 0 && t - offset < this.bLength ? t - offset : null,
    };
  }
}
