from __future__ import annotations

import numpy as np

from ..errors import DomainError, SchemaError
from .base import Cat0Space


class EuclideanSpace(Cat0Space):
    """R^n with the standard metric; points are float arrays of shape (n,)."""

    kind = "euclidean"
    has_log = True

    def __init__(self, dim: int):
        if not isinstance(dim, int) or dim < 1:
            raise SchemaError(f"euclidean dimension must be a positive int, got {dim!r}")
        self.dim = dim

    def point(self, *coords) -> np.ndarray:
        if len(coords) == 1 and np.ndim(coords[0]) == 1:
            coords = coords[0]
        x = np.asarray(coords, dtype=float)
        self.validate(x)
        return x

    def validate(self, x):
        x = np.asarray(x)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            raise DomainError(f"not a point of R^{self.dim}: {x!r}")

    def distance(self, x, y) -> float:
        return float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))

    def _geodesic(self, x, y, t):
        x = np.asarray(x, float)
        return x + t * (np.asarray(y, float) - x)

    def log(self, x, y):
        return np.asarray(y, float) - np.asarray(x, float)

    def exp(self, x, v):
        return np.asarray(x, float) + np.asarray(v, float)

    @property
    def tangent_dim(self):
        return self.dim

    def _barycenter(self, points, weights, tol, max_iter):
        w = np.asarray(weights, dtype=float)
        return (w[:, None] * np.stack([np.asarray(p, float) for p in points])).sum(axis=0) / w.sum()

    def random_point(self, rng, scale=1.0):
        return rng.normal(scale=scale, size=self.dim)

    def neighbors(self, x, h):
        x = np.asarray(x, float)
        out = []
        for i in range(self.dim):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[i] += sgn * h
                out.append(y)
        return out

    def sample_ball(self, x, r, rng):
        v = rng.normal(size=self.dim)
        v /= np.linalg.norm(v)
        return np.asarray(x, float) + v * r * rng.uniform() ** (1.0 / self.dim)

    def descriptor(self):
        return {"kind": "euclidean", "dim": self.dim}

    def point_to_json(self, x):
        return [float(c) for c in np.asarray(x)]

    def point_from_json(self, obj):
        try:
            return self.point(obj)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad euclidean point {obj!r}: {exc}") from None
