// Wire formats of the /v1 HTTP API. Field names are the server's contract;
// the UI renders these verbatim and does no fabrication math of its own.

export type Vec3 = [number, number, number];

export interface GraphDoc {
  vertices: Vec3[];
  edges: [number, number][];
}

export interface EulerInfo {
  classification: 'circuit' | 'trail' | 'none';
  odd_vertices: number[];
  connected: boolean;
  pass: boolean;
}

export interface VertexFinding {
  vertex: number;
  check: 'eulericity' | 'bend_angle';
  status: 'pass' | 'fail';
  detail: string;
  measured: number | null;
}

export interface EdgeFinding {
  edge: [number, number];
  check: 'min_length';
  status: 'pass' | 'fail';
  measured: number;
}

export interface Diagnostics {
  euler: EulerInfo;
  vertex_findings: VertexFinding[];
  edge_findings: EdgeFinding[];
  warnings: string[];
  overall_fabricable: boolean;
}

export interface InstructionJson {
  kind: 'F' | 'B' | 'R';
  magnitude: number;
}

export interface ProgramJson {
  instructions: InstructionJson[];
  corrected: boolean;
  source_hash: string | null;
}

export interface CompileResponse {
  text: string;
  program: ProgramJson;
}

export interface TimelineEvent {
  index: number;
  kind: 'home' | 'feed' | 'bend' | 'rotate';
  start: number;
  end: number;
}

export interface Timeline {
  events: TimelineEvent[];
  total_time: number;
}

export interface Polyline {
  points: Vec3[];
  provenance: number[];
}

export interface ProgramFinding {
  index: number;
  check: string;
  status: 'pass' | 'fail';
  detail: string;
  measured: number;
}

export interface SimulateResponse {
  polyline: Polyline;
  timeline: Timeline;
  intersections: [number, number][];
  program_findings: { findings: ProgramFinding[]; ok: boolean };
}

export interface JogResponse {
  ok: boolean;
  events: string[];
  session_log: InstructionJson[];
}
