import type { JobInfo, ProjectState, StrokeDelta } from "./types.js";

export class RevisionConflict extends Error {
  constructor(public serverRevision: number) {
    super(`revision conflict; server is at ${serverRevision}`);
  }
}

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Thin typed client over the compositing service's HTTP surface. */
export class SeamClient {
  constructor(private baseUrl: string, private fetchFn: typeof fetch = fetch) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (res.status === 409) {
      const body = (await res.json()) as { revision: number };
      throw new RevisionConflict(body.revision);
    }
    if (!res.ok) {
      let detail = `${res.status}`;
      try {
        const body = (await res.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        /* non-JSON error body */
      }
      throw new ServiceError(res.status, detail);
    }
    return res;
  }

  async getProject(): Promise<ProjectState> {
    const res = await this.request("/project");
    return (await res.json()) as ProjectState;
  }

  async putOffset(offset: number, baseRevision: number): Promise<number> {
    const res = await this.request("/offset", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ offset, base_revision: baseRevision }),
    });
    return ((await res.json()) as { revision: number }).revision;
  }

  async putParams(params: Record<string, unknown>, baseRevision: number): Promise<number> {
    const res = await this.request("/params", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ params, base_revision: baseRevision }),
    });
    return ((await res.json()) as { revision: number }).revision;
  }

  async putStrokes(frame: number, deltas: StrokeDelta[], baseRevision: number): Promise<number> {
    const res = await this.request(`/strokes/${frame}`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ deltas, base_revision: baseRevision }),
    });
    return ((await res.json()) as { revision: number }).revision;
  }

  async runStage(stage: string): Promise<string> {
    const res = await this.request(`/run/${stage}`, { method: "POST" });
    return ((await res.json()) as { job: string }).job;
  }

  async getJob(id: string): Promise<JobInfo> {
    const res = await this.request(`/job/${id}`);
    return (await res.json()) as JobInfo;
  }

  async waitJob(id: string, timeoutMs = 120_000, pollMs = 100): Promise<JobInfo> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getJob(id);
      if (job.status !== "running") return job;
      if (Date.now() > deadline) throw new Error(`job ${id} timed out`);
      await new Promise((r) => setTimeout(r, pollMs));
    }
  }

  async exportFrames(pattern: string, seamOverlay = false): Promise<string> {
    const res = await this.request("/export", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ pattern, seam_overlay: seamOverlay }),
    });
    return ((await res.json()) as { job: string }).job;
  }

  frameUrl(clip: "a" | "b", t: number, half = false): string {
    return `${this.baseUrl}/frame/${clip}/${t}${half ? "?scale=half" : ""}`;
  }

  previewUrl(t: number, seam: boolean, half = false): string {
    const params = new URLSearchParams();
    if (seam) params.set("seam", "1");
    if (half) params.set("scale", "half");
    const qs = params.toString();
    return `${this.baseUrl}/preview/${t}${qs ? `?${qs}` : ""}`;
  }

  seamUrl(t: number): string {
    return `${this.baseUrl}/seam/${t}`;
  }
}
