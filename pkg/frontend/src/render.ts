// Canvas drawing: the frame image, saved quads (colored by provenance,
// dimmed when stale), and the in-progress click overlay.

import { imageToCanvas, type ViewTransform } from './geometry.js'
import type { ViewState } from './state.js'
import { annotationsFor } from './state.js'
import type { Annotation, Point, QuadPoints } from './types.js'

const COLORS = {
  human: '#ff9f1c',
  propagated: '#2ec4b6',
  stale: 'rgba(160,160,160,0.6)',
  pending: '#e71d36',
}

function strokeQuad(
  ctx: CanvasRenderingContext2D, quad: QuadPoints, t: ViewTransform,
  color: string, width: number,
): void {
  ctx.beginPath()
  quad.forEach(([x, y], i) => {
    const p = imageToCanvas({ x, y }, t)
    if (i === 0) ctx.moveTo(p.x, p.y)
    else ctx.lineTo(p.x, p.y)
  })
  ctx.closePath()
  ctx.strokeStyle = color
  ctx.lineWidth = width
  ctx.stroke()
}

function annotationColor(a: Annotation): string {
  if (a.stale) return COLORS.stale
  return a.source === 'human' ? COLORS.human : COLORS.propagated
}

export function drawFrame(
  ctx: CanvasRenderingContext2D, image: CanvasImageSource | null,
  state: ViewState, t: ViewTransform,
): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height)
  if (image) {
    ctx.save()
    ctx.translate(t.offsetX, t.offsetY)
    ctx.scale(t.scale, t.scale)
    ctx.drawImage(image, 0, 0)
    ctx.restore()
  }
  for (const ann of annotationsFor(state, state.currentFrame)) {
    strokeQuad(ctx, ann.quad, t, annotationColor(ann), ann.stale ? 1 : 2)
    const [lx, ly] = ann.quad[0]
    const p = imageToCanvas({ x: lx, y: ly }, t)
    ctx.fillStyle = annotationColor(ann)
    ctx.font = '12px sans-serif'
    ctx.fillText(`#${ann.track_id}${ann.label ? ' ' + ann.label : ''}`,
                 p.x + 2, p.y - 4)
  }
  drawPending(ctx, state, t)
}

function drawPending(
  ctx: CanvasRenderingContext2D, state: ViewState, t: ViewTransform,
): void {
  if (state.pendingQuad) {
    strokeQuad(ctx, state.pendingQuad, t, COLORS.pending, 2)
    return
  }
  ctx.fillStyle = COLORS.pending
  state.pendingClicks.forEach((click: Point) => {
    const p = imageToCanvas(click, t)
    ctx.beginPath()
    ctx.arc(p.x, p.y, 3, 0, 2 * Math.PI)
    ctx.fill()
  })
}
