import type { Vec3 } from './types.js';

// Stencil meshes are display-only: the user traces a wireframe over them.
// OBJ (v/f/l records) and ASCII STL are accepted.

export interface StencilMesh {
  vertices: Vec3[];
  /** Unique undirected edges of the faces, for wireframe rendering. */
  edges: [number, number][];
  triangles: [number, number, number][];
}

function dedupeEdges(raw: [number, number][]): [number, number][] {
  const seen = new Set<string>();
  const out: [number, number][] = [];
  for (const [a, b] of raw) {
    if (a === b) continue;
    const key = a < b ? `${a}:${b}` : `${b}:${a}`;
    if (seen.has(key)) continue;
    seen.add(key);
    out.push(a < b ? [a, b] : [b, a]);
  }
  return out;
}

export function parseObjStencil(text: string): StencilMesh {
  const vertices: Vec3[] = [];
  const triangles: [number, number, number][] = [];
  const rawEdges: [number, number][] = [];
  for (const rawLine of text.split(/\r?\n/)) {
    const line = rawLine.split('#', 1)[0].trim();
    if (!line) continue;
    const parts = line.split(/\s+/);
    if (parts[0] === 'v' && parts.length >= 4) {
      vertices.push([Number(parts[1]), Number(parts[2]), Number(parts[3])]);
    } else if (parts[0] === 'f' && parts.length >= 4) {
      // Face indices may carry /texture/normal suffixes; 1-based.
      const idx = parts.slice(1).map((p) => Number(p.split('/')[0]) - 1);
      for (let k = 1; k + 1 < idx.length; k++) {
        triangles.push([idx[0], idx[k], idx[k + 1]]);
      }
      for (let k = 0; k < idx.length; k++) {
        rawEdges.push([idx[k], idx[(k + 1) % idx.length]]);
      }
    } else if (parts[0] === 'l' && parts.length >= 3) {
      const idx = parts.slice(1).map((p) => Number(p) - 1);
      for (let k = 0; k + 1 < idx.length; k++) {
        rawEdges.push([idx[k], idx[k + 1]]);
      }
    }
  }
  if (vertices.some((v) => v.some((c) => !Number.isFinite(c)))) {
    throw new Error('stencil OBJ contains non-numeric vertex coordinates');
  }
  return { vertices, edges: dedupeEdges(rawEdges), triangles };
}

export function parseAsciiStlStencil(text: string): StencilMesh {
  if (!/^\s*solid/.test(text)) {
    throw new Error('only ASCII STL stencils are supported');
  }
  const vertices: Vec3[] = [];
  const keyToIndex = new Map<string, number>();
  const triangles: [number, number, number][] = [];
  const rawEdges: [number, number][] = [];
  let current: number[] = [];
  for (const rawLine of text.split(/\r?\n/)) {
    const line = rawLine.trim();
    if (line.startsWith('vertex')) {
      const parts = line.split(/\s+/).slice(1).map(Number);
      if (parts.length !== 3 || parts.some((c) => !Number.isFinite(c))) {
        throw new Error(`bad STL vertex line: ${line}`);
      }
      const key = parts.join(',');
      let index = keyToIndex.get(key);
      if (index === undefined) {
        index = vertices.length;
        vertices.push(parts as Vec3);
        keyToIndex.set(key, index);
      }
      current.push(index);
    } else if (line.startsWith('endfacet')) {
      if (current.length === 3) {
        triangles.push(current as [number, number, number]);
        rawEdges.push([current[0], current[1]], [current[1], current[2]], [current[2], current[0]]);
      }
      current = [];
    }
  }
  return { vertices, edges: dedupeEdges(rawEdges), triangles };
}

export function parseStencil(text: string, filename: string): StencilMesh {
  if (/\.stl$/i.test(filename)) return parseAsciiStlStencil(text);
  return parseObjStencil(text);
}
