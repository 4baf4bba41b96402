import type { GraphDoc, Vec3 } from './types.js';
import type { StencilMesh } from './stencil.js';
import type { AnnotationSet } from './annotations.js';
import { edgeKey } from './annotations.js';

// Canvas-2D orthographic viewport: yaw/pitch orbit, fit-to-content zoom.
// Kept dependency-free; all projection math lives here and is unit-tested.

export interface ViewPose {
  yawDeg: number;
  pitchDeg: number;
  zoom: number; // px per mm
  centerX: number;
  centerY: number; // canvas px of the world origin
}

export function defaultPose(width: number, height: number): ViewPose {
  return { yawDeg: -30, pitchDeg: -25, zoom: 4, centerX: width / 2, centerY: height / 2 };
}

/** World -> screen under yaw (about +Z) then pitch (about screen X). */
export function project(point: Vec3, pose: ViewPose): [number, number] {
  const yaw = (pose.yawDeg * Math.PI) / 180;
  const pitch = (pose.pitchDeg * Math.PI) / 180;
  const cy = Math.cos(yaw);
  const sy = Math.sin(yaw);
  const x1 = point[0] * cy - point[1] * sy;
  const y1 = point[0] * sy + point[1] * cy;
  const z1 = point[2];
  const cp = Math.cos(pitch);
  const sp = Math.sin(pitch);
  const y2 = y1 * cp - z1 * sp;
  return [pose.centerX + x1 * pose.zoom, pose.centerY - y2 * pose.zoom];
}

export function projectAll(points: readonly Vec3[], pose: ViewPose): [number, number][] {
  return points.map((p) => project(p, pose));
}

/** Zoom/center so all points fit the canvas with a margin. */
export function fitPose(points: readonly Vec3[], width: number, height: number): ViewPose {
  const pose = defaultPose(width, height);
  if (points.length === 0) return pose;
  const projected = projectAll(points, { ...pose, zoom: 1, centerX: 0, centerY: 0 });
  const xs = projected.map((p) => p[0]);
  const ys = projected.map((p) => p[1]);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const span = Math.max(maxX - minX, maxY - minY, 1e-9);
  const zoom = (Math.min(width, height) - 60) / span;
  return {
    ...pose,
    zoom,
    centerX: width / 2 - ((minX + maxX) / 2) * zoom,
    centerY: height / 2 - ((minY + maxY) / 2) * zoom,
  };
}

export class Viewport {
  pose: ViewPose;
  private dragging = false;
  private lastX = 0;
  private lastY = 0;

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.pose = defaultPose(canvas.width, canvas.height);
    canvas.addEventListener('mousedown', (e) => {
      this.dragging = true;
      this.lastX = e.offsetX;
      this.lastY = e.offsetY;
    });
    canvas.addEventListener('mouseup', () => (this.dragging = false));
    canvas.addEventListener('mouseleave', () => (this.dragging = false));
    canvas.addEventListener('mousemove', (e) => {
      if (!this.dragging) return;
      this.pose.yawDeg += (e.offsetX - this.lastX) * 0.5;
      this.pose.pitchDeg = Math.max(-89, Math.min(89, this.pose.pitchDeg + (e.offsetY - this.lastY) * 0.5));
      this.lastX = e.offsetX;
      this.lastY = e.offsetY;
    });
    canvas.addEventListener('wheel', (e) => {
      e.preventDefault();
      this.pose.zoom *= e.deltaY < 0 ? 1.1 : 1 / 1.1;
    });
  }

  fitTo(points: readonly Vec3[]): void {
    const fitted = fitPose(points, this.canvas.width, this.canvas.height);
    this.pose.zoom = fitted.zoom;
    this.pose.centerX = fitted.centerX;
    this.pose.centerY = fitted.centerY;
  }

  render(
    stencil: StencilMesh | null,
    graph: GraphDoc,
    annotations: AnnotationSet | null,
    wire: Vec3[] | null,
  ): void {
    const ctx = this.canvas.getContext('2d');
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.fillStyle = '#14161a';
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);

    if (stencil) {
      // Semi-transparent reference mesh for tracing.
      const pts = projectAll(stencil.vertices, this.pose);
      ctx.strokeStyle = 'rgba(130, 160, 200, 0.25)';
      ctx.lineWidth = 1;
      for (const [a, b] of stencil.edges) {
        ctx.beginPath();
        ctx.moveTo(pts[a][0], pts[a][1]);
        ctx.lineTo(pts[b][0], pts[b][1]);
        ctx.stroke();
      }
      ctx.fillStyle = 'rgba(130, 160, 200, 0.6)';
      for (const [x, y] of pts) {
        ctx.beginPath();
        ctx.arc(x, y, 2.5, 0, Math.PI * 2);
        ctx.fill();
      }
    }

    const pts = projectAll(graph.vertices, this.pose);
    ctx.lineWidth = 3;
    for (const [a, b] of graph.edges) {
      const color = annotations?.edgeColors.get(edgeKey(a, b)) ?? '#c8cdd4';
      ctx.strokeStyle = color;
      ctx.beginPath();
      ctx.moveTo(pts[a][0], pts[a][1]);
      ctx.lineTo(pts[b][0], pts[b][1]);
      ctx.stroke();
    }
    for (let i = 0; i < pts.length; i++) {
      const color = annotations?.vertexColors.get(i) ?? '#e8eaed';
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.arc(pts[i][0], pts[i][1], 5, 0, Math.PI * 2);
      ctx.fill();
    }

    if (wire && wire.length > 1) {
      const wpts = projectAll(wire, this.pose);
      ctx.strokeStyle = '#f0a935';
      ctx.lineWidth = 4;
      ctx.beginPath();
      ctx.moveTo(wpts[0][0], wpts[0][1]);
      for (let i = 1; i < wpts.length; i++) ctx.lineTo(wpts[i][0], wpts[i][1]);
      ctx.stroke();
    }
  }
}
