// Wire types of the annotation service (JSON, pixel coordinates,
// origin top-left).

export interface Point {
  x: number
  y: number
}

/** Four corners, clockwise from the corner nearest the image top-left. */
export type QuadPoints = [number, number][]

export interface Annotation {
  track_id: number
  quad: QuadPoints
  label: string | null
  source: 'human' | 'propagated'
  stale?: boolean
}

export interface FrameAnnotations {
  index: number
  annotations: Annotation[]
}

export interface StepDiagnostics {
  frame: number
  matches: number
  inliers: number
  mean_reproj_error: number | null
  status: 'ok' | 'failed'
  reason?: string
}

export interface SessionInfo {
  id: string
  frame_count: number
  revision: number
  frames: FrameAnnotations[]
  diagnostics: StepDiagnostics[]
  jobs: JobInfo[]
}

export interface JobInfo {
  id: string
  from: number
  to: number
  status: 'running' | 'completed' | 'halted'
  halted_at: number | null
  reason: string | null
  frames_done: number
}

export interface ExportedDocument {
  version: number
  frames: FrameAnnotations[]
  diagnostics: StepDiagnostics[]
}
