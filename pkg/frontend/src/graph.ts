import type { GraphDoc, Vec3 } from './types.js';

// Pure editing operations over the wireframe document. Edges are kept
// normalized (i < j, no duplicates, no self-loops) to match the server's
// graph format.

export function emptyGraph(): GraphDoc {
  return { vertices: [], edges: [] };
}

export function cloneGraph(g: GraphDoc): GraphDoc {
  return {
    vertices: g.vertices.map((v) => [...v] as Vec3),
    edges: g.edges.map((e) => [...e] as [number, number]),
  };
}

function normalizeEdge(a: number, b: number): [number, number] {
  return a < b ? [a, b] : [b, a];
}

export function hasEdge(g: GraphDoc, a: number, b: number): boolean {
  const [i, j] = normalizeEdge(a, b);
  return g.edges.some((e) => e[0] === i && e[1] === j);
}

export function addVertex(g: GraphDoc, point: Vec3): { graph: GraphDoc; index: number } {
  const graph = cloneGraph(g);
  graph.vertices.push([...point] as Vec3);
  return { graph, index: graph.vertices.length - 1 };
}

export function moveVertex(g: GraphDoc, index: number, point: Vec3): GraphDoc {
  if (index < 0 || index >= g.vertices.length) throw new RangeError(`no vertex ${index}`);
  const graph = cloneGraph(g);
  graph.vertices[index] = [...point] as Vec3;
  return graph;
}

export function addEdge(g: GraphDoc, a: number, b: number): GraphDoc {
  if (a === b) throw new RangeError('self-loops are not allowed');
  const n = g.vertices.length;
  if (a < 0 || b < 0 || a >= n || b >= n) throw new RangeError(`edge (${a}, ${b}) out of range`);
  if (hasEdge(g, a, b)) return cloneGraph(g);
  const graph = cloneGraph(g);
  graph.edges.push(normalizeEdge(a, b));
  return graph;
}

export function removeEdge(g: GraphDoc, a: number, b: number): GraphDoc {
  const [i, j] = normalizeEdge(a, b);
  const graph = cloneGraph(g);
  graph.edges = graph.edges.filter((e) => !(e[0] === i && e[1] === j));
  return graph;
}

/** Remove a vertex along with its incident edges; remaining indices shift. */
export function removeVertex(g: GraphDoc, index: number): GraphDoc {
  if (index < 0 || index >= g.vertices.length) throw new RangeError(`no vertex ${index}`);
  const graph = emptyGraph();
  graph.vertices = g.vertices.filter((_, k) => k !== index).map((v) => [...v] as Vec3);
  for (const [a, b] of g.edges) {
    if (a === index || b === index) continue;
    const shift = (k: number) => (k > index ? k - 1 : k);
    graph.edges.push(normalizeEdge(shift(a), shift(b)));
  }
  return graph;
}

export function vertexDegrees(g: GraphDoc): number[] {
  const degrees = new Array<number>(g.vertices.length).fill(0);
  for (const [a, b] of g.edges) {
    degrees[a] += 1;
    degrees[b] += 1;
  }
  return degrees;
}
