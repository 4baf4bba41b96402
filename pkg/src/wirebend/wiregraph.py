"""Wireframe graph model, document ingestion, and Euler path extraction.

A wireframe is an undirected graph whose vertices are 3D points in
millimeters.  Fabrication from a single continuous wire requires an edge
walk that uses every edge exactly once, so the central questions answered
here are "is this graph Eulerian?" and "give me one deterministic Euler
path".
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

Point = tuple[float, float, float]
Edge = tuple[int, int]


class GraphError(ValueError):
    """Malformed wireframe document or graph operation on invalid input."""


@dataclass(frozen=True)
class WireframeGraph:
    """Undirected wireframe: vertex coordinates (mm) plus normalized edges.

    Edges are stored once each as (i, j) with i < j; the edge id of an edge
    is its index in ``edges``.  No self-loops, no parallel edges.
    """

    vertices: tuple[Point, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        n = len(self.vertices)
        seen: set[Edge] = set()
        for i, j in self.edges:
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) references a missing vertex")
            if i > j:
                raise GraphError(f"edge ({i}, {j}) not normalized (expected i < j)")
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * len(self.vertices)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency(self) -> list[list[int]]:
        """Neighbor lists, each sorted ascending."""
        adj: list[list[int]] = [[] for _ in self.vertices]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        for neighbors in adj:
            neighbors.sort()
        return adj

    def edge_id(self, i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        return self.edges.index(key)

    def edge_length(self, i: int, j: int) -> float:
        a, b = self.vertices[i], self.vertices[j]
        return math.dist(a, b)

    def isolated_vertices(self) -> list[int]:
        return [v for v, d in enumerate(self.degrees()) if d == 0]

    def to_dict(self) -> dict:
        return {
            "vertices": [list(v) for v in self.vertices],
            "edges": [list(e) for e in self.edges],
        }


def graph_from_data(vertices: Iterable[Sequence[float]],
                    edges: Iterable[Sequence[int]]) -> WireframeGraph:
    """Build a normalized graph: orient edges i < j and drop duplicates.

    Vertex order is preserved from the input document.
    """
    verts: list[Point] = []
    for k, v in enumerate(vertices):
        coords = tuple(float(c) for c in v)
        if len(coords) != 3 or not all(math.isfinite(c) for c in coords):
            raise GraphError(f"vertex {k} is not a finite 3D point: {v!r}")
        verts.append(coords)  # type: ignore[arg-type]

    normalized: list[Edge] = []
    seen: set[Edge] = set()
    for e in edges:
        if len(e) != 2:
            raise GraphError(f"edge {e!r} is not a pair")
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise GraphError(f"self-loop at vertex {i}")
        if not (0 <= i < len(verts) and 0 <= j < len(verts)):
            raise GraphError(f"edge ({i}, {j}) references a missing vertex")
        key: Edge = (i, j) if i < j else (j, i)
        if key in seen:
            continue
        seen.add(key)
        normalized.append(key)
    return WireframeGraph(tuple(verts), tuple(normalized))


def ingest_json(text: str) -> WireframeGraph:
    """Parse the JSON graph format: {"vertices": [[x,y,z],...], "edges": [[i,j],...]}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "vertices" not in doc or "edges" not in doc:
        raise GraphError("JSON graph must be an object with 'vertices' and 'edges'")
    return graph_from_data(doc["vertices"], doc["edges"])


def ingest_obj(text: str) -> WireframeGraph:
    """Parse the OBJ subset: `v x y z` and `l i j [k ...]` records (1-based).

    Polyline `l` records expand to consecutive edges.  Any other record type
    is ignored with a warning.
    """
    vertices: list[Point] = []
    edges: list[tuple[int, int]] = []
    ignored: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise GraphError(f"line {lineno}: vertex needs 3 coordinates")
            try:
                vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError as exc:
                raise GraphError(f"line {lineno}: bad vertex coordinate") from exc
        elif tag == "l":
            try:
                idx = [int(p) for p in parts[1:]]
            except ValueError as exc:
                raise GraphError(f"line {lineno}: bad line-record index") from exc
            if len(idx) < 2:
                raise GraphError(f"line {lineno}: line record needs >= 2 indices")
            for a, b in zip(idx, idx[1:]):
                edges.append((a - 1, b - 1))
        else:
            ignored.add(tag)
    if ignored:
        logger.warning("ignored OBJ record types: %s", ", ".join(sorted(ignored)))
    return graph_from_data(vertices, edges)


def ingest_graph(text: str, fmt: str | None = None) -> WireframeGraph:
    """Ingest a wireframe document; `fmt` is 'json', 'obj', or None to sniff."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "obj"
    if fmt == "json":
        return ingest_json(text)
    if fmt == "obj":
        return ingest_obj(text)
    raise GraphError(f"unknown graph format {fmt!r}")


@dataclass(frozen=True)
class EulerStatus:
    """Eulerian classification of a wireframe.

    classification: 'circuit' (closed walk exists), 'trail' (open walk), or
    'none'.  Connectivity is judged over vertices that carry at least one
    edge; an edgeless graph classifies as 'none'.
    """

    classification: str
    odd_vertices: tuple[int, ...] = field(default_factory=tuple)
    connected: bool = False

    @property
    def fabricable_path_exists(self) -> bool:
        return self.classification in ("circuit", "trail")

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "odd_vertices": list(self.odd_vertices),
            "connected": self.connected,
        }


def _connected_over_used_vertices(g: WireframeGraph) -> bool:
    deg = g.degrees()
    used = [v for v, d in enumerate(deg) if d > 0]
    if not used:
        return False
    adj = g.adjacency()
    seen = {used[0]}
    stack = [used[0]]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return all(v in seen for v in used)


def euler_status(g: WireframeGraph) -> EulerStatus:
    """Classify g as Eulerian circuit / trail / none.

    circuit: connected and every vertex has even degree.
    trail:   connected and exactly two vertices have odd degree.
    """
    odd = tuple(v for v, d in enumerate(g.degrees()) if d % 2 == 1)
    connected = _connected_over_used_vertices(g)
    if connected and not odd:
        cls = "circuit"
    elif connected and len(odd) == 2:
        cls = "trail"
    else:
        cls = "none"
    return EulerStatus(cls, odd, connected)


def euler_path(g: WireframeGraph) -> list[int]:
    """Extract an Euler path with Hierholzer's algorithm.

    Deterministic: trails start at the lowest odd-degree vertex, circuits at
    the lowest-index vertex with an edge, and ties among unused edges are
    broken toward the lowest neighbor index.  Raises GraphError if no Euler
    path exists.
    """
    status = euler_status(g)
    if not status.fabricable_path_exists:
        raise GraphError(f"graph is not Eulerian (classification={status.classification})")

    adj = g.adjacency()
    if status.classification == "trail":
        start = min(status.odd_vertices)
    else:
        start = next(v for v, nbrs in enumerate(adj) if nbrs)

    # Multiset of remaining edge uses per endpoint pair.
    remaining: dict[Edge, int] = {e: 1 for e in g.edges}
    cursor = [0] * len(adj)  # per-vertex scan position into sorted neighbors

    stack = [start]
    walk: list[int] = []
    while stack:
        u = stack[-1]
        advanced = False
        while cursor[u] < len(adj[u]):
            w = adj[u][cursor[u]]
            key = (u, w) if u < w else (w, u)
            if remaining.get(key, 0) > 0:
                remaining[key] = 0
                stack.append(w)
                advanced = True
                break
            cursor[u] += 1
        if not advanced:
            walk.append(stack.pop())
    walk.reverse()
    return walk
