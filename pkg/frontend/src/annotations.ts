import type { Diagnostics } from './types.js';

// Check results render as colored spheres (vertices) and tubes (edges).
// Colors come straight from the diagnostics response; a failing check wins
// over a passing one when a vertex carries both.

export const GREEN = '#2fa84f';
export const RED = '#d43a2f';

export interface AnnotationSet {
  vertexColors: Map<number, string>;
  edgeColors: Map<string, string>;
  fabricable: boolean;
}

export function edgeKey(a: number, b: number): string {
  return a < b ? `${a}:${b}` : `${b}:${a}`;
}

export function buildAnnotations(diagnostics: Diagnostics): AnnotationSet {
  const vertexColors = new Map<number, string>();
  for (const finding of diagnostics.vertex_findings) {
    const color = finding.status === 'pass' ? GREEN : RED;
    if (vertexColors.get(finding.vertex) === RED) continue;
    vertexColors.set(finding.vertex, color);
  }
  const edgeColors = new Map<string, string>();
  for (const finding of diagnostics.edge_findings) {
    edgeColors.set(edgeKey(...finding.edge), finding.status === 'pass' ? GREEN : RED);
  }
  return { vertexColors, edgeColors, fabricable: diagnostics.overall_fabricable };
}

export function redVertexCount(annotations: AnnotationSet): number {
  let count = 0;
  for (const color of annotations.vertexColors.values()) {
    if (color === RED) count += 1;
  }
  return count;
}

export function allGreen(annotations: AnnotationSet): boolean {
  return annotations.fabricable && redVertexCount(annotations) === 0 &&
    [...annotations.edgeColors.values()].every((c) => c === GREEN);
}
