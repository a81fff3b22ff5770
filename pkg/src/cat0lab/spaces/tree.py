"""Finite metric trees, optionally with infinite rays attached at leaves.

A point is a ``TreePoint(edge, offset)``: the point at distance ``offset``
from the first endpoint of edge number ``edge``.  An edge of infinite
length is a ray; its far end is not a point of the space.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, SchemaError
from .base import Cat0Space


@dataclass(frozen=True)
class TreePoint:
    edge: int
    offset: float


@dataclass(frozen=True)
class TreeEdge:
    u: object
    v: object
    length: float

    @property
    def is_ray(self) -> bool:
        return math.isinf(self.length)


class MetricTree(Cat0Space):
    kind = "metric_tree"

    def __init__(self, edges):
        parsed = []
        for e in edges:
            try:
                u, v, length = e
                length = float(length)
            except (TypeError, ValueError):
                raise SchemaError(f"tree edge must be [u, v, length], got {e!r}") from None
            if not length > 0:
                raise SchemaError(f"tree edge length must be positive, got {length}")
            if u == v:
                raise SchemaError(f"tree edge {e!r} is a loop")
            parsed.append(TreeEdge(u, v, length))
        if not parsed:
            raise SchemaError("tree needs at least one edge")
        self.edges = parsed
        adj: dict = {}
        for i, e in enumerate(parsed):
            adj.setdefault(e.u, []).append(i)
            adj.setdefault(e.v, []).append(i)
        self.adjacency = adj
        self.ends = set()
        for e in parsed:
            if e.is_ray:
                if len(adj[e.v]) != 1:
                    raise SchemaError(f"ray end {e.v!r} must be a leaf")
                self.ends.add(e.v)
        if any(e.is_ray and e.u in self.ends for e in parsed):
            raise SchemaError("a ray must be attached to a finite vertex")
        if len(adj) != len(parsed) + 1:
            raise SchemaError("edge list does not form a tree")
        self.vertices = [v for v in adj if v not in self.ends]
        self._dist, self._parent = {}, {}
        for s in self.vertices:
            self._bfs(s)
        if any(len(self._dist[s]) != len(self.vertices) for s in self.vertices):
            raise SchemaError("edge list does not form a connected tree")

    def _bfs(self, s):
        dist, parent = {s: 0.0}, {s: None}
        queue = deque([s])
        while queue:
            a = queue.popleft()
            for i in self.adjacency[a]:
                e = self.edges[i]
                b = e.v if e.u == a else e.u
                if b in dist or b in self.ends:
                    continue
                dist[b] = dist[a] + e.length
                parent[b] = (a, i)
                queue.append(b)
        self._dist[s], self._parent[s] = dist, parent

    # -- points -----------------------------------------------------------------
    def vertex_point(self, v) -> TreePoint:
        if v not in self._dist:
            raise DomainError(f"unknown vertex {v!r}")
        i = self.adjacency[v][0]
        e = self.edges[i]
        return TreePoint(i, 0.0 if e.u == v else e.length)

    def point(self, edge: int, offset: float) -> TreePoint:
        p = TreePoint(int(edge), float(offset))
        self.validate(p)
        return p

    def validate(self, p):
        if not isinstance(p, TreePoint) or not 0 <= p.edge < len(self.edges):
            raise DomainError(f"not a tree point: {p!r}")
        L = self.edges[p.edge].length
        if not (0.0 <= p.offset <= L) or math.isinf(p.offset):
            raise DomainError(f"offset {p.offset} outside edge of length {L}")

    def _endpoints(self, p: TreePoint):
        e = self.edges[p.edge]
        out = [(e.u, p.offset)]
        if not e.is_ray:
            out.append((e.v, e.length - p.offset))
        return out

    def _route(self, p: TreePoint, q: TreePoint):
        """(distance, exit vertex of p's edge, entry vertex of q's edge)."""
        best = (math.inf, None, None)
        for a, da in self._endpoints(p):
            row = self._dist[a]
            for b, db in self._endpoints(q):
                d = da + row[b] + db
                if d < best[0]:
                    best = (d, a, b)
        return best

    def distance(self, p, q) -> float:
        if p.edge == q.edge:
            return abs(p.offset - q.offset)
        return self._route(p, q)[0]

    def vertex_path(self, a, b) -> list:
        """Edges (index, from, to) along the vertex path a -> b."""
        parent = self._parent[a]
        steps = []
        cur = b
        while cur != a:
            prev, i = parent[cur]
            steps.append((i, prev, cur))
            cur = prev
        return steps[::-1]

    def _along(self, i: int, start, s: float) -> TreePoint:
        e = self.edges[i]
        return TreePoint(i, s if start == e.u else e.length - s)

    def _geodesic(self, p, q, t):
        if p.edge == q.edge:
            return TreePoint(p.edge, p.offset + t * (q.offset - p.offset))
        D, a, b = self._route(p, q)
        tau = t * D
        e = self.edges[p.edge]
        da = p.offset if a == e.u else e.length - p.offset
        if tau <= da:
            return TreePoint(p.edge, p.offset - tau if a == e.u else p.offset + tau)
        tau -= da
        for i, x, _ in self.vertex_path(a, b):
            L = self.edges[i].length
            if tau <= L:
                return self._along(i, x, tau)
            tau -= L
        return self._along(q.edge, b, min(tau, self._endpoint_gap(q, b)))

    def _endpoint_gap(self, q, b):
        e = self.edges[q.edge]
        return q.offset if b == e.u else e.length - q.offset

    # -- barycenter ---------------------------------------------------------------
    def _edge_coordinates(self, i: int, points) -> np.ndarray:
        """m_j with d(x_j, point at offset s on edge i) = |s - m_j| for all s."""
        e = self.edges[i]
        m = np.empty(len(points))
        for j, x in enumerate(points):
            if x.edge == i:
                m[j] = x.offset
                continue
            du = self.distance(x, self.vertex_point(e.u))
            if e.is_ray:
                m[j] = -du
                continue
            dv = self.distance(x, self.vertex_point(e.v))
            m[j] = -du if du <= dv else e.length + dv
        return m

    def _barycenter(self, points, weights, tol, max_iter):
        """Exact: on each edge the objective is sum_j w_j (s - m_j)^2."""
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
        best = (math.inf, None)
        for i, e in enumerate(self.edges):
            m = self._edge_coordinates(i, points)
            s = float(np.clip(np.dot(w, m), 0.0, e.length))
            f = float(np.dot(w, (s - m) ** 2))
            if f < best[0]:
                best = (f, TreePoint(i, s))
        return best[1]

    def circumcenter(self, points):
        """Midpoint of a farthest pair; radius is half the diameter."""
        pts = list(points)
        best = (0.0, pts[0], pts[0])
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d = self.distance(pts[i], pts[j])
                if d > best[0]:
                    best = (d, pts[i], pts[j])
        D, p, q = best
        return self.geodesic_point(p, q, 0.5), D / 2.0

    # -- directions and sampling -------------------------------------------------------
    def directions(self, p: TreePoint) -> list[tuple[int, object]]:
        """Germs of geodesics leaving p, as (edge, vertex it starts from)."""
        e = self.edges[p.edge]
        if 0.0 < p.offset < e.length:
            return [(p.edge, e.u), (p.edge, e.v)]
        v = e.u if p.offset == 0.0 else e.v
        return [(i, v) for i in self.adjacency[v]]

    def move(self, p: TreePoint, direction, h: float, rng=None) -> TreePoint:
        """Walk distance h from p in a direction, continuing through vertices.

        Past a vertex the continuation edge is chosen by ``rng`` (uniformly)
        or, without an rng, the walk stops at the vertex.
        """
        i, start = direction
        e = self.edges[i]
        if start == e.u:
            s_from, target = p.offset if p.edge == i else 0.0, e.v
            room = e.length - s_from
            if h <= room:
                return TreePoint(i, s_from + h)
        else:
            s_from, target = p.offset if p.edge == i else e.length, e.u
            room = s_from
            if h <= room:
                return TreePoint(i, s_from - h)
        here = self.vertex_point(target) if target not in self.ends else None
        if rng is None or here is None:
            return here
        nxt = [j for j in self.adjacency[target] if j != i]
        if not nxt:
            return here
        j = nxt[int(rng.integers(len(nxt)))]
        return self.move(here, (j, target), h - room, rng)

    def neighbors(self, p, h):
        return [self.move(p, d, h) for d in self.directions(p)]

    def sample_ball(self, p, r, rng):
        dirs = self.directions(p)
        d = dirs[int(rng.integers(len(dirs)))]
        return self.move(p, d, r * rng.uniform(), rng)

    def random_point(self, rng, scale=1.0):
        finite = [i for i, e in enumerate(self.edges) if not e.is_ray]
        if not finite or rng.uniform() < len(self.ends) / (len(self.edges) + 1):
            rays = [i for i, e in enumerate(self.edges) if e.is_ray]
            if rays:
                return TreePoint(rays[int(rng.integers(len(rays)))], float(rng.exponential(scale)))
        lengths = np.array([self.edges[i].length for i in finite])
        i = finite[int(rng.choice(len(finite), p=lengths / lengths.sum()))]
        return TreePoint(i, float(rng.uniform(0, self.edges[i].length)))

    # -- serialization -----------------------------------------------------------------
    def descriptor(self):
        return {"kind": "metric_tree",
                "edges": [[e.u, e.v, "inf" if e.is_ray else e.length] for e in self.edges]}

    def point_to_json(self, p):
        return {"edge": p.edge, "offset": p.offset}

    def point_from_json(self, obj):
        if isinstance(obj, dict) and "vertex" in obj:
            v = obj["vertex"]
            if v not in self._dist:
                raise SchemaError(f"unknown vertex {v!r}")
            return self.vertex_point(v)
        try:
            return self.point(obj["edge"], obj["offset"])
        except (KeyError, TypeError, DomainError) as exc:
            raise SchemaError(f"bad tree point {obj!r}: {exc}") from None


def star_tree(legs: int, length: float = 1.0) -> MetricTree:
    """Vertex 0 joined to leaves 1..legs by edges of the given length."""
    return MetricTree([(0, k, length) for k in range(1, legs + 1)])
