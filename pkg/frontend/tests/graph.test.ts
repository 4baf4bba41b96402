import { describe, expect, it } from 'vitest';

import {
  addEdge,
  addVertex,
  emptyGraph,
  hasEdge,
  moveVertex,
  removeEdge,
  removeVertex,
  vertexDegrees,
} from '../src/graph.js';
import type { GraphDoc } from '../src/types.js';

function square(): GraphDoc {
  return {
    vertices: [[0, 0, 0], [30, 0, 0], [30, 30, 0], [0, 30, 0]],
    edges: [[0, 1], [1, 2], [2, 3], [0, 3]],
  };
}

describe('graph editing', () => {
  it('adds vertices immutably', () => {
    const g = emptyGraph();
    const { graph, index } = addVertex(g, [1, 2, 3]);
    expect(index).toBe(0);
    expect(graph.vertices).toEqual([[1, 2, 3]]);
    expect(g.vertices).toEqual([]);
  });

  it('normalizes and dedupes edges', () => {
    let g = square();
    g = addEdge(g, 3, 1);
    expect(g.edges).toContainEqual([1, 3]);
    const again = addEdge(g, 1, 3);
    expect(again.edges.length).toBe(g.edges.length);
  });

  it('rejects self-loops and out-of-range edges', () => {
    expect(() => addEdge(square(), 2, 2)).toThrow();
    expect(() => addEdge(square(), 0, 9)).toThrow();
  });

  it('removes edges', () => {
    const g = removeEdge(square(), 1, 0);
    expect(hasEdge(g, 0, 1)).toBe(false);
    expect(g.edges.length).toBe(3);
  });

  it('removes vertices and reindexes edges', () => {
    const g = removeVertex(square(), 1);
    expect(g.vertices.length).toBe(3);
    // Former edges (1,2),(0,1) die with the vertex; (2,3),(0,3) shift down.
    expect(g.edges).toEqual([[1, 2], [0, 2]]);
  });

  it('moves vertices', () => {
    const g = moveVertex(square(), 0, [5, 5, 5]);
    expect(g.vertices[0]).toEqual([5, 5, 5]);
  });

  it('computes degrees', () => {
    expect(vertexDegrees(square())).toEqual([2, 2, 2, 2]);
  });
});
