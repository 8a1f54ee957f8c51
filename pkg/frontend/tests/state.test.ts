import { describe, expect, it, vi } from "vitest";

import { SeamClient } from "../src/api.js";
import { ViewState } from "../src/state.js";
import type { ProjectState } from "../src/types.js";

function projectJson(revision: number, offset = 0): ProjectState {
  return {
    revision,
    sources: {
      a_pattern: "a_%04d.png",
      a_range: [0, 5],
      b_pattern: "b_%04d.png",
      b_range: [0, 5],
    },
    params: { offset },
    strokes: [],
    timeline: { length: 6, t0: 0, overlap: [0, 6] },
  };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ViewState", () => {
  it("tracks revision and marks results stale after mutations", async () => {
    let revision = 0;
    const fetchFn = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      const path = String(url);
      if (path.endsWith("/project")) return jsonResponse(projectJson(revision));
      if (path.includes("/strokes/")) {
        revision += 1;
        return jsonResponse({ revision, strokes: 1 });
      }
      if (path.includes("/run/")) return jsonResponse({ job: "j1", revision });
      if (path.includes("/job/")) {
        return jsonResponse({
          id: "j1", stage: "composite", status: "done", stages_run: ["cut"],
          timings: {}, error: null, revision, exported: null,
        });
      }
      throw new Error(`unexpected ${path} ${init?.method}`);
    });
    const state = new ViewState(new SeamClient("http://svc", fetchFn as typeof fetch));
    await state.refresh();
    await state.runAndTrack("composite");
    expect(state.resultStale).toBe(false);
    await state.sendStrokes(0, [{ x: 1, y: 1, label: "A" }]);
    expect(state.resultStale).toBe(true);
  });

  it("replays stroke deltas after a revision conflict", async () => {
    let serverRevision = 5;
    let strokePuts = 0;
    const fetchFn = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      const path = String(url);
      if (path.endsWith("/project")) return jsonResponse(projectJson(serverRevision));
      if (path.includes("/strokes/")) {
        strokePuts += 1;
        const body = JSON.parse(String(init?.body)) as { base_revision: number };
        if (body.base_revision !== serverRevision) {
          return jsonResponse({ error: "stale revision", revision: serverRevision }, 409);
        }
        serverRevision += 1;
        return jsonResponse({ revision: serverRevision, strokes: 1 });
      }
      throw new Error(`unexpected ${path}`);
    });
    const state = new ViewState(new SeamClient("http://svc", fetchFn as typeof fetch));
    await state.refresh();
    serverRevision = 7; // another writer slipped in
    await state.sendStrokes(0, [{ x: 2, y: 3, label: "B" }]);
    expect(strokePuts).toBe(2); // conflict, refetch, successful replay
    expect(state.revision).toBe(8);
  });

  it("clamps frame scrubbing to the loaded range", async () => {
    const fetchFn = vi.fn(async () => jsonResponse(projectJson(0)));
    const state = new ViewState(new SeamClient("http://svc", fetchFn as typeof fetch));
    await state.refresh();
    expect(state.clampFrame(-3)).toBe(0);
    expect(state.clampFrame(99)).toBe(5);
  });
});
