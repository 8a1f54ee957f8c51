export type Label = "A" | "B";

export interface StrokeDelta {
  x: number;
  y: number;
  label: Label;
  erase?: boolean;
}

export interface ProjectState {
  revision: number;
  sources: {
    a_pattern: string;
    a_range: [number, number];
    b_pattern: string;
    b_range: [number, number];
  };
  params: Record<string, unknown> & { offset: number };
  strokes: Array<[number, number, number, number]>;
  timeline: { length: number; t0: number; overlap: [number, number] };
}

export interface JobInfo {
  id: string;
  stage: string;
  status: "running" | "done" | "error";
  stages_run: string[];
  timings: Record<string, number>;
  error: string | null;
  revision: number;
  exported: string[] | null;
}

export type OverlayMode = "none" | "seam" | "difference";
