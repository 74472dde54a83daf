import type { BoxOut } from "./types.js"

export interface OverlayRect {
  x: number
  y: number
  width: number
  height: number
  color: string
  lineWidth: number
  caption: string
}

export const COLOR_UNLABELED = "#2ecc40"
export const COLOR_LABELED = "#0074d9"
export const COLOR_SELECTED = "#ff4136"
export const COLOR_MARKED = "#ff851b"

/** Page-space box to canvas-space rect; inclusive edges add one pixel. */
export function toRect(box: [number, number, number, number], scale: number) {
  const [x0, y0, x1, y1] = box
  return {
    x: x0 * scale,
    y: y0 * scale,
    width: (x1 - x0 + 1) * scale,
    height: (y1 - y0 + 1) * scale,
  }
}

export function overlayRects(
  boxes: BoxOut[],
  selectedId: number | null,
  markedIds: number[],
  scale: number,
): OverlayRect[] {
  return boxes.map((b) => {
    const selected = b.id === selectedId
    const marked = markedIds.includes(b.id)
    const color = selected
      ? COLOR_SELECTED
      : marked
        ? COLOR_MARKED
        : b.letter
          ? COLOR_LABELED
          : COLOR_UNLABELED
    return {
      ...toRect(b.box, scale),
      color,
      lineWidth: selected ? 2 : 1,
      caption: b.letter ?? "",
    }
  })
}

export function drawOverlay(ctx: CanvasRenderingContext2D, rects: OverlayRect[]): void {
  for (const r of rects) {
    ctx.strokeStyle = r.color
    ctx.lineWidth = r.lineWidth
    ctx.strokeRect(r.x, r.y, r.width, r.height)
    if (r.caption) {
      ctx.fillStyle = r.color
      ctx.font = "12px monospace"
      ctx.fillText(r.caption, r.x, r.y - 2)
    }
  }
}
