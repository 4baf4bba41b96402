import type { ApiClient } from './api.js';
import type { Diagnostics, GraphDoc, SimulateResponse, Vec3 } from './types.js';
import type { StencilMesh } from './stencil.js';
import * as graphOps from './graph.js';
import { nearestVertex } from './snapping.js';
import { PlaybackController } from './playback.js';

// One design session per browser tab. Every edit bumps the graph revision;
// validation results are tagged with the revision they were computed for and
// stale ones are dropped. At most one validate request is in flight
// (latest-wins: a newer revision re-queues).

export interface ExportBundle {
  instructionText: string;
  graphJson: string;
  corrected: boolean;
}

type Scheduler = (fn: () => void, ms: number) => unknown;

export class UISession {
  stencil: StencilMesh | null = null;
  graph: GraphDoc = graphOps.emptyGraph();
  revision = 0;

  diagnostics: Diagnostics | null = null;
  diagnosticsRevision = -1;

  simulation: SimulateResponse | null = null;
  simulationRevision = -1;
  playback: PlaybackController | null = null;

  annotationsVisible = true;
  traceMode = false;
  /** Maps stencil vertex index -> traced graph vertex index, so revisiting a
   * stencil vertex reuses the same wireframe vertex. */
  private traceMap = new Map<number, number>();
  private lastTraced = -1;

  private validateInFlight = false;
  private debounceHandle: unknown = null;
  onDiagnostics: ((d: Diagnostics) => void) | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
    readonly debounceMs = 300,
  ) {}

  // -- stencil + tracing -------------------------------------------------

  loadStencil(mesh: StencilMesh): void {
    this.stencil = mesh;
    this.clearTrace();
  }

  clearStencil(): void {
    this.stencil = null;
  }

  clearTrace(): void {
    this.traceMap.clear();
    this.lastTraced = -1;
  }

  setTraceMode(on: boolean): void {
    this.traceMode = on;
    if (!on) this.lastTraced = -1;
  }

  /** Snap a picked 3D point to the nearest stencil vertex, append it to the
   * wireframe (reusing the vertex if already traced), and auto-edge it to
   * the previously traced vertex. Returns the graph vertex index. */
  traceClick(picked: Vec3): number {
    if (!this.stencil) throw new Error('no stencil loaded');
    const snapIndex = nearestVertex(this.stencil.vertices, picked);
    if (snapIndex < 0) throw new Error('stencil has no vertices');
    let vertex = this.traceMap.get(snapIndex);
    if (vertex === undefined) {
      const { graph, index } = graphOps.addVertex(this.graph, this.stencil.vertices[snapIndex]);
      this.graph = graph;
      vertex = index;
      this.traceMap.set(snapIndex, vertex);
    }
    if (this.lastTraced >= 0 && this.lastTraced !== vertex) {
      this.graph = graphOps.addEdge(this.graph, this.lastTraced, vertex);
    }
    this.lastTraced = vertex;
    this.bumpRevision();
    return vertex;
  }

  // -- editing -----------------------------------------------------------

  addVertex(point: Vec3): number {
    const { graph, index } = graphOps.addVertex(this.graph, point);
    this.graph = graph;
    this.bumpRevision();
    return index;
  }

  removeVertex(index: number): void {
    this.graph = graphOps.removeVertex(this.graph, index);
    this.clearTrace(); // indices shifted; the trace map is void
    this.bumpRevision();
  }

  addEdge(a: number, b: number): void {
    this.graph = graphOps.addEdge(this.graph, a, b);
    this.bumpRevision();
  }

  removeEdge(a: number, b: number): void {
    this.graph = graphOps.removeEdge(this.graph, a, b);
    this.bumpRevision();
  }

  moveVertex(index: number, point: Vec3): void {
    this.graph = graphOps.moveVertex(this.graph, index, point);
    this.bumpRevision();
  }

  private bumpRevision(): void {
    this.revision += 1;
    if (this.diagnosticsRevision !== this.revision) {
      this.diagnostics = null; // stale results are never shown
    }
    if (this.simulationRevision !== this.revision) {
      this.simulation = null;
      this.playback = null;
    }
    this.scheduleValidation();
  }

  // -- checks ------------------------------------------------------------

  private scheduleValidation(): void {
    if (this.debounceHandle !== null) return;
    this.debounceHandle = this.schedule(() => {
      this.debounceHandle = null;
      void this.runChecks();
    }, this.debounceMs);
  }

  /** Validate the current revision; drops the response if edits happened
   * while the request was in flight (and re-queues for the new revision). */
  async runChecks(): Promise<Diagnostics | null> {
    if (this.graph.vertices.length === 0) return null;
    if (this.validateInFlight) return null;
    this.validateInFlight = true;
    const requested = this.revision;
    try {
      const diagnostics = await this.api.validate(this.graph);
      if (requested === this.revision) {
        this.diagnostics = diagnostics;
        this.diagnosticsRevision = requested;
        this.onDiagnostics?.(diagnostics);
        return diagnostics;
      }
      this.scheduleValidation();
      return null;
    } finally {
      this.validateInFlight = false;
    }
  }

  // -- animation + export --------------------------------------------------

  /** Compile + simulate the current design and build a playback controller. */
  async animate(): Promise<PlaybackController> {
    const requested = this.revision;
    const compiled = await this.api.compile(this.graph, true);
    const simulation = await this.api.simulate(compiled.text);
    if (requested !== this.revision) {
      throw new Error('design changed during animation setup');
    }
    this.simulation = simulation;
    this.simulationRevision = requested;
    this.playback = new PlaybackController(simulation.timeline);
    return this.playback;
  }

  /** Error-corrected instruction text plus the graph document, for download.
   * The text is exactly the server's compile output. */
  async exportDesign(): Promise<ExportBundle> {
    const compiled = await this.api.compile(this.graph, true);
    return {
      instructionText: compiled.text,
      graphJson: JSON.stringify(this.graph, null, 2),
      corrected: compiled.program.corrected,
    };
  }
}
