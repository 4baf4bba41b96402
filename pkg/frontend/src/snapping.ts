import type { Vec3 } from './types.js';

// Tracing snaps each pick to the nearest stencil vertex (vertex snapping
// only; no edge or face snapping).

export function distanceSq(a: Vec3, b: Vec3): number {
  const dx = a[0] - b[0];
  const dy = a[1] - b[1];
  const dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

/** Index of the stencil vertex nearest to `point`, or -1 if none is within
 * `maxDistance` (Infinity = unconditional snap). */
export function nearestVertex(
  stencilVertices: readonly Vec3[],
  point: Vec3,
  maxDistance = Infinity,
): number {
  let best = -1;
  let bestSq = maxDistance * maxDistance;
  for (let i = 0; i < stencilVertices.length; i++) {
    const d = distanceSq(stencilVertices[i], point);
    if (d < bestSq || (best === -1 && d === bestSq && d !== Infinity)) {
      best = i;
      bestSq = d;
    }
  }
  return best;
}

/** Nearest vertex in screen space: used when the pick comes from a click. */
export function nearestProjectedVertex(
  projected: readonly [number, number][],
  x: number,
  y: number,
  pickRadiusPx: number,
): number {
  let best = -1;
  let bestSq = pickRadiusPx * pickRadiusPx;
  for (let i = 0; i < projected.length; i++) {
    const dx = projected[i][0] - x;
    const dy = projected[i][1] - y;
    const d = dx * dx + dy * dy;
    if (d <= bestSq) {
      best = i;
      bestSq = d;
    }
  }
  return best;
}
