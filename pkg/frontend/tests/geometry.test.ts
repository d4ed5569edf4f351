import { describe, expect, it } from 'vitest'

import {
  canvasToImage,
  fitTransform,
  imageToCanvas,
  isSimpleQuad,
  quadFromClicks,
} from '../src/geometry.js'
import type { Point } from '../src/types.js'

const p = (x: number, y: number): Point => ({ x, y })

describe('quadFromClicks', () => {
  it('orders corners clockwise from the top-left', () => {
    const clicks = [p(10, 0), p(0, 10), p(0, 0), p(10, 10)]
    expect(quadFromClicks(clicks)).toEqual([[0, 0], [10, 0], [10, 10], [0, 10]])
  })

  it('repairs a bow-tie click order', () => {
    // corners clicked diagonally: raw order self-intersects
    const clicks = [p(0, 0), p(10, 10), p(10, 0), p(0, 10)]
    expect(isSimpleQuad(clicks)).toBe(false)
    const quad = quadFromClicks(clicks)
    expect(quad).not.toBeNull()
    expect(isSimpleQuad(quad!.map(([x, y]) => p(x, y)))).toBe(true)
  })

  it('rejects repeated corners', () => {
    expect(quadFromClicks([p(0, 0), p(0, 0), p(5, 5), p(0, 5)])).toBeNull()
  })

  it('rejects collinear degenerate clicks', () => {
    expect(quadFromClicks([p(0, 0), p(1, 0), p(2, 0), p(3, 0)])).toBeNull()
  })

  it('needs exactly four clicks', () => {
    expect(quadFromClicks([p(0, 0), p(1, 0), p(1, 1)])).toBeNull()
  })

  it('keeps a perspective quad intact', () => {
    const clicks = [p(12, 8), p(96, 14), p(90, 60), p(8, 52)]
    expect(quadFromClicks(clicks)).toEqual(
      [[12, 8], [96, 14], [90, 60], [8, 52]])
  })

  it('never produces a self-intersecting quad on random input', () => {
    let produced = 0
    for (let seed = 0; seed < 200; seed++) {
      const rand = mulberry32(seed)
      const clicks = Array.from({ length: 4 }, () =>
        p(rand() * 100, rand() * 100))
      const quad = quadFromClicks(clicks)
      if (quad) {
        produced += 1
        expect(isSimpleQuad(quad.map(([x, y]) => p(x, y)))).toBe(true)
      }
    }
    expect(produced).toBeGreaterThan(150)
  })
})

describe('view transform', () => {
  it('round-trips image coordinates exactly enough to avoid drift', () => {
    const t = fitTransform(256, 192, 960, 540)
    const corners: Point[] = [p(0, 0), p(255.5, 191.25), p(17.125, 33.5)]
    for (const c of corners) {
      const back = canvasToImage(imageToCanvas(c, t), t)
      expect(Math.abs(back.x - c.x)).toBeLessThan(1e-9)
      expect(Math.abs(back.y - c.y)).toBeLessThan(1e-9)
    }
  })

  it('identical image points render at identical canvas pixels', () => {
    const t = fitTransform(320, 240, 800, 600)
    const saved = p(123.456789, 98.7654321)
    const refetched = p(123.456789, 98.7654321) // server echoes floats exactly
    expect(imageToCanvas(saved, t)).toEqual(imageToCanvas(refetched, t))
  })

  it('letterboxes while preserving aspect', () => {
    const t = fitTransform(100, 100, 200, 100)
    expect(t.scale).toBe(1)
    expect(t.offsetX).toBe(50)
    expect(t.offsetY).toBe(0)
  })
})

function mulberry32(seed: number): () => number {
  let a = seed + 0x6d2b79f5
  return () => {
    a |= 0
    a = (a + 0x6d2b79f5) | 0
    let t = Math.imul(a ^ (a >>> 15), 1 | a)
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}
