// DOM wiring: one canvas, a frame timeline, draw/save/propagate controls,
// and a 1 s job poller that keeps overlays live while a propagation job
// appends results.

import { ApiClient, ApiError } from './api.js'
import { canvasToImage, fitTransform, type ViewTransform } from './geometry.js'
import { JobPoller } from './polling.js'
import { drawFrame } from './render.js'
import {
  annotationsFor,
  hasUsableSeed,
  initialState,
  nextTrackId,
  reduce,
  type Event,
  type ViewState,
} from './state.js'
import type { Annotation } from './types.js'

const api = new ApiClient('')
let state: ViewState = initialState()
let poller: JobPoller | null = null
let frameImage: HTMLImageElement | null = null
let transform: ViewTransform = { scale: 1, offsetX: 0, offsetY: 0 }

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T

const canvas = () => $<HTMLCanvasElement>('frame-canvas')

function dispatch(event: Event): void {
  const before = state
  state = reduce(state, event)
  if (state.currentFrame !== before.currentFrame || event.kind === 'session-loaded') {
    void loadFrameImage()
  }
  render()
}

async function refreshDocument(): Promise<void> {
  if (!state.sessionId) return
  try {
    const info = await api.getSession(state.sessionId)
    dispatch({ kind: 'document-refreshed', info })
  } catch (err) {
    dispatch({ kind: 'error', message: describe(err) })
  }
}

function describe(err: unknown): string {
  return err instanceof Error ? err.message : String(err)
}

async function loadFrameImage(): Promise<void> {
  if (!state.sessionId) return
  const img = new Image()
  const frame = state.currentFrame
  img.onload = () => {
    if (state.currentFrame === frame) {
      frameImage = img
      transform = fitTransform(img.naturalWidth, img.naturalHeight,
                               canvas().width, canvas().height)
      render()
    }
  }
  img.src = api.frameUrl(state.sessionId, frame) + `?rev=${state.revision}`
}

function render(): void {
  const ctx = canvas().getContext('2d')
  if (ctx) drawFrame(ctx, frameImage, state, transform)

  $('frame-label').textContent =
    state.frameCount ? `frame ${state.currentFrame + 1} / ${state.frameCount}` : '—'
  const slider = $<HTMLInputElement>('frame-slider')
  slider.max = String(Math.max(0, state.frameCount - 1))
  slider.value = String(state.currentFrame)

  const drawButton = $<HTMLButtonElement>('draw-toggle')
  drawButton.textContent = state.drawMode ? 'drawing: click 4 corners' : 'draw quad'
  drawButton.classList.toggle('active', state.drawMode)
  $<HTMLButtonElement>('save-pending').disabled = state.pendingQuad === null
  $<HTMLButtonElement>('propagate').disabled =
    !hasUsableSeed(state, state.currentFrame) || state.banner?.status === 'running'

  const banner = $('job-banner')
  if (state.banner) {
    const b = state.banner
    banner.textContent =
      b.status === 'running' ? `propagating… ${b.framesDone} frames done`
      : b.status === 'completed' ? 'propagation completed'
      : `propagation halted at frame ${b.haltedAt}: ${b.reason ?? 'unknown'} — corrected it? save and re-propagate`
    banner.className = `banner ${b.status}`
  } else {
    banner.textContent = ''
    banner.className = 'banner'
  }
  $('error-box').textContent = state.pendingRejected
    ? 'those four corners cross; click them again in perimeter order'
    : state.error ?? ''
}

async function saveAnnotations(): Promise<void> {
  if (!state.sessionId || !state.pendingQuad) return
  const label = $<HTMLInputElement>('label-input').value || null
  const keep: Annotation[] = annotationsFor(state, state.currentFrame)
    .filter((a) => !a.stale)
    .map(({ stale: _stale, ...rest }) => rest)
  const added: Annotation = {
    track_id: nextTrackId(state),
    quad: state.pendingQuad,
    label,
    source: 'human',
  }
  try {
    const { revision } = await api.putAnnotations(
      state.sessionId, state.currentFrame, [...keep, added])
    dispatch({ kind: 'annotations-saved', revision })
    await refreshDocument()
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      dispatch({ kind: 'error', message: 'a propagation job is running; wait for it' })
    } else {
      dispatch({ kind: 'error', message: describe(err) })
    }
  }
}

async function startPropagation(): Promise<void> {
  if (!state.sessionId) return
  const from = state.currentFrame
  const to = state.frameCount - 1
  if (from >= to) return
  try {
    const { job_id } = await api.propagate(state.sessionId, from, to)
    dispatch({ kind: 'job-started', jobId: job_id })
    poller?.stop()
    poller = new JobPoller(
      api, state.sessionId, job_id,
      (banner) => {
        dispatch({ kind: 'job-updated', banner })
        void refreshDocument()
      },
      (banner) => {
        dispatch({ kind: 'job-updated', banner })
        void refreshDocument()
      },
      (message) => dispatch({ kind: 'error', message }),
    )
    poller.start()
  } catch (err) {
    dispatch({ kind: 'error', message: describe(err) })
  }
}

function wire(): void {
  $<HTMLButtonElement>('open-session').addEventListener('click', async () => {
    const dir = $<HTMLInputElement>('frames-dir').value
    try {
      const { id } = await api.createSession(dir)
      const info = await api.getSession(id)
      dispatch({ kind: 'session-loaded', info })
    } catch (err) {
      dispatch({ kind: 'error', message: describe(err) })
    }
  })
  $<HTMLInputElement>('frame-slider').addEventListener('input', (ev) => {
    dispatch({ kind: 'frame-changed',
               index: Number((ev.target as HTMLInputElement).value) })
  })
  $<HTMLButtonElement>('draw-toggle').addEventListener('click', () =>
    dispatch({ kind: 'draw-toggled' }))
  $<HTMLButtonElement>('save-pending').addEventListener('click', () =>
    void saveAnnotations())
  $<HTMLButtonElement>('propagate').addEventListener('click', () =>
    void startPropagation())
  canvas().addEventListener('click', (ev) => {
    const rect = canvas().getBoundingClientRect()
    const point = canvasToImage(
      { x: ev.clientX - rect.left, y: ev.clientY - rect.top }, transform)
    dispatch({ kind: 'canvas-clicked', point })
  })
  $<HTMLButtonElement>('export').addEventListener('click', async () => {
    if (!state.sessionId) return
    const doc = await api.exportDocument(state.sessionId)
    const blob = new Blob([JSON.stringify(doc, null, 1)],
                          { type: 'application/json' })
    const a = document.createElement('a')
    a.href = URL.createObjectURL(blob)
    a.download = `annotations-${state.sessionId}.json`
    a.click()
  })
  render()
}

document.addEventListener('DOMContentLoaded', wire)
