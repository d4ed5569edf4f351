// Thin fetch client for the annotation service. Every method returns the
// parsed JSON body or throws ApiError carrying the server's reason field.

import type {
  Annotation,
  ExportedDocument,
  JobInfo,
  SessionInfo,
} from './types.js'

export class ApiError extends Error {
  constructor(readonly status: number, readonly reason: string) {
    super(`HTTP ${status}: ${reason}`)
  }
}

async function parse<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let reason = resp.statusText
    try {
      const body = (await resp.json()) as { reason?: string; detail?: unknown }
      reason = body.reason ?? JSON.stringify(body.detail ?? body)
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, reason)
  }
  return (await resp.json()) as T
}

export class ApiClient {
  constructor(readonly baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`
  }

  async createSession(framesDir: string): Promise<{ id: string; frame_count: number }> {
    return parse(await fetch(this.url('/api/sessions'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ frames_dir: framesDir }),
    }))
  }

  async getSession(id: string): Promise<SessionInfo> {
    return parse(await fetch(this.url(`/api/sessions/${id}`)))
  }

  frameUrl(id: string, index: number): string {
    return this.url(`/api/sessions/${id}/frames/${index}`)
  }

  async putAnnotations(
    id: string, frame: number, annotations: Annotation[],
  ): Promise<{ revision: number }> {
    return parse(await fetch(
      this.url(`/api/sessions/${id}/frames/${frame}/annotations`), {
        method: 'PUT',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ annotations }),
      }))
  }

  async propagate(
    id: string, from: number, to: number, seed = 0,
  ): Promise<{ job_id: string }> {
    return parse(await fetch(this.url(`/api/sessions/${id}/propagate`), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ from, to, seed }),
    }))
  }

  async getJob(id: string, jobId: string): Promise<JobInfo> {
    return parse(await fetch(this.url(`/api/sessions/${id}/jobs/${jobId}`)))
  }

  async exportDocument(id: string): Promise<ExportedDocument> {
    return parse(await fetch(this.url(`/api/sessions/${id}/export`)))
  }
}
