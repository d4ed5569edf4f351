// One-second job polling with injectable scheduling so tests can drive
// the clock.

import type { ApiClient } from './api.js'
import type { JobBanner } from './state.js'
import type { JobInfo } from './types.js'

export type Scheduler = (fn: () => void, ms: number) => unknown

export function bannerOf(job: JobInfo): JobBanner {
  return {
    jobId: job.id,
    status: job.status,
    haltedAt: job.halted_at,
    reason: job.reason,
    framesDone: job.frames_done,
  }
}

export class JobPoller {
  private stopped = false

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly jobId: string,
    private readonly onUpdate: (banner: JobBanner) => void,
    private readonly onSettled: (banner: JobBanner) => void,
    private readonly onError: (message: string) => void,
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
    private readonly intervalMs = 1000,
  ) {}

  start(): void {
    void this.tick()
  }

  stop(): void {
    this.stopped = true
  }

  private async tick(): Promise<void> {
    if (this.stopped) return
    let job: JobInfo
    try {
      job = await this.api.getJob(this.sessionId, this.jobId)
    } catch (err) {
      this.onError(err instanceof Error ? err.message : String(err))
      return
    }
    const banner = bannerOf(job)
    this.onUpdate(banner)
    if (job.status === 'running') {
      this.schedule(() => void this.tick(), this.intervalMs)
    } else {
      this.onSettled(banner)
    }
  }
}

/** Await a job's completion; the promise form used by headless flows. */
export async function waitForJob(
  api: ApiClient, sessionId: string, jobId: string,
  opts: { intervalMs?: number; timeoutMs?: number } = {},
): Promise<JobInfo> {
  const interval = opts.intervalMs ?? 1000
  const deadline = Date.now() + (opts.timeoutMs ?? 120_000)
  for (;;) {
    const job = await api.getJob(sessionId, jobId)
    if (job.status !== 'running') return job
    if (Date.now() > deadline) throw new Error(`job ${jobId} timed out`)
    await new Promise((resolve) => setTimeout(resolve, interval))
  }
}
