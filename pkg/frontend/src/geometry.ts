// Quad construction from free-order corner clicks plus the canvas
// transform. The ordering must match the backend convention exactly:
// clockwise starting at the corner nearest the image top-left.

import type { Point, QuadPoints } from './types.js'

function cross(o: Point, a: Point, b: Point): number {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

function segmentsTouch(p1: Point, p2: Point, p3: Point, p4: Point): boolean {
  const d1 = cross(p3, p4, p1)
  const d2 = cross(p3, p4, p2)
  const d3 = cross(p1, p2, p3)
  const d4 = cross(p1, p2, p4)
  if (d1 > 0 !== d2 > 0 && d3 > 0 !== d4 > 0 && d1 !== 0 && d2 !== 0) {
    return true
  }
  const onSeg = (a: Point, b: Point, c: Point) =>
    Math.min(a.x, b.x) <= c.x && c.x <= Math.max(a.x, b.x) &&
    Math.min(a.y, b.y) <= c.y && c.y <= Math.max(a.y, b.y)
  if (d1 === 0 && onSeg(p3, p4, p1)) return true
  if (d2 === 0 && onSeg(p3, p4, p2)) return true
  if (d3 === 0 && onSeg(p1, p2, p3)) return true
  if (d4 === 0 && onSeg(p1, p2, p4)) return true
  return false
}

/** A 4-gon is simple iff neither pair of opposite edges crosses. */
export function isSimpleQuad(pts: Point[]): boolean {
  if (pts.length !== 4) return false
  if (segmentsTouch(pts[0], pts[1], pts[2], pts[3])) return false
  if (segmentsTouch(pts[1], pts[2], pts[3], pts[0])) return false
  return true
}

/**
 * Order four clicks clockwise (screen sense, y down) starting at the
 * corner nearest the top-left. Returns null when the points are
 * degenerate (repeated or collinear enough that no simple quad exists).
 */
export function quadFromClicks(clicks: Point[]): QuadPoints | null {
  if (clicks.length !== 4) return null
  const cx = (clicks[0].x + clicks[1].x + clicks[2].x + clicks[3].x) / 4
  const cy = (clicks[0].y + clicks[1].y + clicks[2].y + clicks[3].y) / 4
  const sorted = [...clicks].sort(
    (a, b) => Math.atan2(a.y - cy, a.x - cx) - Math.atan2(b.y - cy, b.x - cx),
  )
  let start = 0
  for (let i = 1; i < 4; i++) {
    const key = (p: Point) => p.x + p.y
    if (key(sorted[i]) < key(sorted[start]) ||
        (key(sorted[i]) === key(sorted[start]) && sorted[i].y < sorted[start].y)) {
      start = i
    }
  }
  const ordered = [...sorted.slice(start), ...sorted.slice(0, start)]
  if (!isSimpleQuad(ordered)) return null
  return ordered.map((p) => [p.x, p.y]) as QuadPoints
}

/** Scale-and-offset mapping between image pixels and canvas pixels. */
export interface ViewTransform {
  scale: number
  offsetX: number
  offsetY: number
}

export function fitTransform(
  imageW: number, imageH: number, canvasW: number, canvasH: number,
): ViewTransform {
  const scale = Math.min(canvasW / imageW, canvasH / imageH)
  return {
    scale,
    offsetX: (canvasW - imageW * scale) / 2,
    offsetY: (canvasH - imageH * scale) / 2,
  }
}

export function imageToCanvas(p: Point, t: ViewTransform): Point {
  return { x: p.x * t.scale + t.offsetX, y: p.y * t.scale + t.offsetY }
}

export function canvasToImage(p: Point, t: ViewTransform): Point {
  return { x: (p.x - t.offsetX) / t.scale, y: (p.y - t.offsetY) / t.scale }
}
