import { RevisionConflict, SeamClient } from "./api.js";
import type { Label, OverlayMode, ProjectState, StrokeDelta } from "./types.js";

/**
 * Client view state. The service owns all authoritative state; this class
 * tracks the revision it reflects, marks results stale on any mutation, and
 * replays unacknowledged stroke deltas after a revision conflict.
 */
export class ViewState {
  frame = 0;
  zoom = 1.0;
  brushLabel: Label = "A";
  brushRadius = 1;
  brushErase = false;
  overlay: OverlayMode = "none";
  project: ProjectState | null = null;
  /** revision the last computed result (preview/seam) reflects */
  resultRevision: number | null = null;
  jobRunning = false;

  constructor(private client: SeamClient) {}

  get revision(): number {
    return this.project?.revision ?? 0;
  }

  get resultStale(): boolean {
    return this.resultRevision !== null && this.resultRevision !== this.revision;
  }

  async refresh(): Promise<ProjectState> {
    this.project = await this.client.getProject();
    return this.project;
  }

  clampFrame(index: number): number {
    const length = this.project?.timeline.length ?? 1;
    return Math.min(Math.max(index, 0), length - 1);
  }

  async applyOffset(offset: number): Promise<void> {
    for (let attempt = 0; attempt < 2; attempt++) {
      try {
        const revision = await this.client.putOffset(offset, this.revision);
        if (this.project) this.project.revision = revision;
        await this.refresh();
        return;
      } catch (err) {
        if (err instanceof RevisionConflict && attempt === 0) {
          await this.refresh();
          continue;
        }
        throw err;
      }
    }
  }

  /** Send stroke deltas; on a stale-revision conflict, refetch and replay. */
  async sendStrokes(frame: number, deltas: StrokeDelta[]): Promise<void> {
    if (!deltas.length) return;
    for (let attempt = 0; attempt < 2; attempt++) {
      try {
        const revision = await this.client.putStrokes(frame, deltas, this.revision);
        if (this.project) this.project.revision = revision;
        return;
      } catch (err) {
        if (err instanceof RevisionConflict && attempt === 0) {
          await this.refresh();
          continue;
        }
        throw err;
      }
    }
  }

  async runAndTrack(stage: string): Promise<string[]> {
    this.jobRunning = true;
    try {
      const jobId = await this.client.runStage(stage);
      const job = await this.client.waitJob(jobId);
      if (job.status === "error") throw new Error(job.error ?? "computation failed");
      this.resultRevision = job.revision;
      return job.stages_run;
    } finally {
      this.jobRunning = false;
    }
  }
}
