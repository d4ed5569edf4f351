// View state and its pure reducer. Rendering derives everything from
// (latest server document, local pending edits), so a refresh can only
// lose unsaved clicks, never saved work.

import { quadFromClicks } from './geometry.js'
import type { Annotation, Point, QuadPoints, SessionInfo } from './types.js'

export interface JobBanner {
  jobId: string
  status: 'running' | 'completed' | 'halted'
  haltedAt: number | null
  reason: string | null
  framesDone: number
}

export interface ViewState {
  sessionId: string | null
  frameCount: number
  revision: number
  currentFrame: number
  drawMode: boolean
  selectedTrack: number
  pendingClicks: Point[]
  pendingQuad: QuadPoints | null
  pendingRejected: boolean
  annotationsByFrame: Map<number, Annotation[]>
  banner: JobBanner | null
  error: string | null
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    frameCount: 0,
    revision: -1,
    currentFrame: 0,
    drawMode: false,
    selectedTrack: 0,
    pendingClicks: [],
    pendingQuad: null,
    pendingRejected: false,
    annotationsByFrame: new Map(),
    banner: null,
    error: null,
  }
}

export type Event =
  | { kind: 'session-loaded'; info: SessionInfo }
  | { kind: 'document-refreshed'; info: SessionInfo }
  | { kind: 'frame-changed'; index: number }
  | { kind: 'draw-toggled' }
  | { kind: 'canvas-clicked'; point: Point }
  | { kind: 'pending-cleared' }
  | { kind: 'annotations-saved'; revision: number }
  | { kind: 'job-started'; jobId: string }
  | { kind: 'job-updated'; banner: JobBanner }
  | { kind: 'error'; message: string }
  | { kind: 'error-cleared' }

function indexAnnotations(info: SessionInfo): Map<number, Annotation[]> {
  const map = new Map<number, Annotation[]>()
  for (const frame of info.frames) {
    map.set(frame.index, frame.annotations)
  }
  return map
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.max(lo, Math.min(hi, value))
}

export function reduce(state: ViewState, event: Event): ViewState {
  switch (event.kind) {
    case 'session-loaded':
      return {
        ...initialState(),
        sessionId: event.info.id,
        frameCount: event.info.frame_count,
        revision: event.info.revision,
        annotationsByFrame: indexAnnotations(event.info),
      }
    case 'document-refreshed': {
      if (event.info.id !== state.sessionId) return state
      return {
        ...state,
        revision: event.info.revision,
        frameCount: event.info.frame_count,
        annotationsByFrame: indexAnnotations(event.info),
      }
    }
    case 'frame-changed': {
      const index = clamp(event.index, 0, Math.max(0, state.frameCount - 1))
      if (index === state.currentFrame) return state
      // pending edits belong to the frame they were drawn on
      return { ...state, currentFrame: index, pendingClicks: [],
               pendingQuad: null, pendingRejected: false }
    }
    case 'draw-toggled':
      return { ...state, drawMode: !state.drawMode, pendingClicks: [],
               pendingQuad: null, pendingRejected: false }
    case 'canvas-clicked': {
      if (!state.drawMode || state.pendingQuad) return state
      const clicks = [...state.pendingClicks, event.point]
      if (clicks.length < 4) {
        return { ...state, pendingClicks: clicks, pendingRejected: false }
      }
      const quad = quadFromClicks(clicks)
      if (quad === null) {
        return { ...state, pendingClicks: [], pendingQuad: null,
                 pendingRejected: true }
      }
      return { ...state, pendingClicks: clicks, pendingQuad: quad,
               pendingRejected: false }
    }
    case 'pending-cleared':
      return { ...state, pendingClicks: [], pendingQuad: null,
               pendingRejected: false }
    case 'annotations-saved':
      return { ...state, revision: event.revision, pendingClicks: [],
               pendingQuad: null, pendingRejected: false }
    case 'job-started':
      return {
        ...state,
        banner: { jobId: event.jobId, status: 'running', haltedAt: null,
                  reason: null, framesDone: 0 },
      }
    case 'job-updated': {
      const next = { ...state, banner: event.banner }
      if (event.banner.status === 'halted' && event.banner.haltedAt !== null) {
        // the correction loop: focus the failure frame, ready to draw
        next.currentFrame = clamp(event.banner.haltedAt, 0,
                                  Math.max(0, state.frameCount - 1))
        next.drawMode = true
        next.pendingClicks = []
        next.pendingQuad = null
      }
      return next
    }
    case 'error':
      return { ...state, error: event.message }
    case 'error-cleared':
      return { ...state, error: null }
  }
}

/** Annotations to render for a frame, stale ones flagged for dimming. */
export function annotationsFor(state: ViewState, frame: number): Annotation[] {
  return state.annotationsByFrame.get(frame) ?? []
}

/** One saved human or fresh propagated quad exists at the frame. */
export function hasUsableSeed(state: ViewState, frame: number): boolean {
  return annotationsFor(state, frame).some((a) => !a.stale)
}

export function nextTrackId(state: ViewState): number {
  let max = -1
  for (const anns of state.annotationsByFrame.values()) {
    for (const a of anns) max = Math.max(max, a.track_id)
  }
  return max + 1
}
