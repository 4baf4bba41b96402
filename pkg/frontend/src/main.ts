import { ApiClient, ApiError } from './api.js';
import { UISession } from './session.js';
import { Viewport } from './viewport.js';
import { buildAnnotations } from './annotations.js';
import type { AnnotationSet } from './annotations.js';
import { parseStencil } from './stencil.js';
import { nearestProjectedVertex } from './snapping.js';
import { projectAll } from './viewport.js';
import { polylineAtPosition } from './playback.js';
import { downloadText } from './download.js';
import type { Vec3 } from './types.js';

const apiBase = (window as { WIREBEND_API?: string }).WIREBEND_API ?? '';
const api = new ApiClient(apiBase);
const session = new UISession(api);

const canvas = document.getElementById('viewport') as HTMLCanvasElement;
const viewport = new Viewport(canvas);
const statusLine = document.getElementById('status') as HTMLElement;
const progressBar = document.getElementById('progress') as HTMLProgressElement;
const progressText = document.getElementById('progress-text') as HTMLElement;
const totalTimeText = document.getElementById('total-time') as HTMLElement;

let annotations: AnnotationSet | null = null;

function setStatus(text: string, isError = false): void {
  statusLine.textContent = text;
  statusLine.style.color = isError ? '#d43a2f' : '#c8cdd4';
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `server: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

session.onDiagnostics = (diagnostics) => {
  annotations = buildAnnotations(diagnostics);
  const red = diagnostics.vertex_findings.filter((f) => f.status === 'fail').length +
    diagnostics.edge_findings.filter((f) => f.status === 'fail').length;
  setStatus(diagnostics.overall_fabricable
    ? `fabricable (${diagnostics.euler.classification})`
    : `${red} failing check(s); euler: ${diagnostics.euler.classification}`);
  render();
};

function render(): void {
  let wire: Vec3[] | null = null;
  if (session.playback && session.simulation) {
    wire = polylineAtPosition(session.simulation.polyline, session.playback.timeline,
                              session.playback.position);
  }
  viewport.render(session.stencil, session.graph,
                  session.annotationsVisible ? annotations : null, wire);
}

// -- trace panel ------------------------------------------------------------

const stencilInput = document.getElementById('stencil-file') as HTMLInputElement;
stencilInput.addEventListener('change', async () => {
  const file = stencilInput.files?.[0];
  if (!file) return;
  try {
    session.loadStencil(parseStencil(await file.text(), file.name));
    viewport.fitTo(session.stencil!.vertices);
    setStatus(`stencil loaded: ${session.stencil!.vertices.length} vertices`);
  } catch (err) {
    setStatus(describeError(err), true);
  }
  render();
});

(document.getElementById('stencil-clear') as HTMLButtonElement).addEventListener('click', () => {
  session.clearStencil();
  render();
});

const traceToggle = document.getElementById('trace-toggle') as HTMLButtonElement;
traceToggle.addEventListener('click', () => {
  session.setTraceMode(!session.traceMode);
  traceToggle.textContent = session.traceMode ? 'Stop Tracing' : 'Trace Wireframe';
});

canvas.addEventListener('click', (e) => {
  if (!session.traceMode || !session.stencil) return;
  const projected = projectAll(session.stencil.vertices, viewport.pose);
  const hit = nearestProjectedVertex(projected, e.offsetX, e.offsetY, 18);
  if (hit < 0) return;
  session.traceClick(session.stencil.vertices[hit]);
  render();
});

// -- edit panel ---------------------------------------------------------------

function intField(id: string): number {
  return Number((document.getElementById(id) as HTMLInputElement).value);
}

(document.getElementById('edge-add') as HTMLButtonElement).addEventListener('click', () => {
  try {
    session.addEdge(intField('edge-a'), intField('edge-b'));
  } catch (err) {
    setStatus(describeError(err), true);
  }
  render();
});

(document.getElementById('edge-remove') as HTMLButtonElement).addEventListener('click', () => {
  session.removeEdge(intField('edge-a'), intField('edge-b'));
  render();
});

(document.getElementById('vertex-remove') as HTMLButtonElement).addEventListener('click', () => {
  try {
    session.removeVertex(intField('vertex-id'));
  } catch (err) {
    setStatus(describeError(err), true);
  }
  render();
});

// -- check panel ----------------------------------------------------------------

(document.getElementById('run-checks') as HTMLButtonElement).addEventListener('click', () => {
  void session.runChecks().catch((err) => setStatus(describeError(err), true));
});

(document.getElementById('toggle-annotations') as HTMLButtonElement).addEventListener('click', () => {
  session.annotationsVisible = !session.annotationsVisible;
  render();
});

// -- animate panel -----------------------------------------------------------------

let lastFrame = 0;
function animationLoop(now: number): void {
  const dt = lastFrame ? (now - lastFrame) / 1000 : 0;
  lastFrame = now;
  const playback = session.playback;
  if (playback) {
    playback.tick(dt);
    progressBar.value = playback.progress;
    progressText.textContent = `${playback.progressPercent.toFixed(1)}%`;
    if (playback.playing) render();
  }
  requestAnimationFrame(animationLoop);
}
requestAnimationFrame(animationLoop);

(document.getElementById('animate-generate') as HTMLButtonElement).addEventListener('click', () => {
  void session.animate()
    .then((playback) => {
      for (const kind of ['feed', 'bend', 'rotate'] as const) {
        const input = document.getElementById(`speed-${kind}`) as HTMLInputElement;
        playback.multipliers[kind] = Number(input.value) || 1;
      }
      totalTimeText.textContent = `${playback.totalTime.toFixed(1)} s`;
      setStatus('animation ready');
    })
    .catch((err) => setStatus(describeError(err), true));
});

(document.getElementById('animate-play') as HTMLButtonElement).addEventListener('click', () => {
  const playback = session.playback;
  if (!playback) return;
  playback.playing ? playback.pause() : playback.play();
});

(document.getElementById('animate-reset') as HTMLButtonElement).addEventListener('click', () => {
  session.playback?.reset();
  render();
});

// -- export panel ---------------------------------------------------------------------

(document.getElementById('export-design') as HTMLButtonElement).addEventListener('click', () => {
  void session.exportDesign()
    .then((bundle) => {
      downloadText('design.txt', bundle.instructionText);
      downloadText('design.json', bundle.graphJson, 'application/json');
      setStatus('exported design.txt + design.json');
    })
    .catch((err) => setStatus(describeError(err), true));
});

// -- manual machine panel ---------------------------------------------------------------

(document.getElementById('jog-send') as HTMLButtonElement).addEventListener('click', () => {
  const kind = (document.getElementById('jog-kind') as HTMLSelectElement).value as 'F' | 'B' | 'R';
  const magnitude = Number((document.getElementById('jog-magnitude') as HTMLInputElement).value);
  void api.jog(kind, magnitude)
    .then((r) => setStatus(`jogged ${kind} ${magnitude}; session has ${r.session_log.length} command(s)`))
    .catch((err) => setStatus(describeError(err), true));
});

render();
setStatus('load a stencil or start editing');
