"""Products (with the l2 metric) and constant rescalings of spaces."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, SchemaError
from .base import Cat0Space


class ProductSpace(Cat0Space):
    kind = "product"

    def __init__(self, factors):
        factors = list(factors)
        if len(factors) < 2:
            raise SchemaError("a product needs at least two factors")
        self.factors = factors
        self.has_log = all(f.has_log for f in factors)

    def validate(self, x):
        if not isinstance(x, tuple) or len(x) != len(self.factors):
            raise DomainError(f"product point must be a {len(self.factors)}-tuple, got {x!r}")
        for f, xi in zip(self.factors, x):
            f.validate(xi)

    def distance(self, x, y):
        return math.sqrt(sum(f.distance(a, b) ** 2 for f, a, b in zip(self.factors, x, y)))

    def _geodesic(self, x, y, t):
        return tuple(f.geodesic_point(a, b, t) for f, a, b in zip(self.factors, x, y))

    @property
    def tangent_dim(self):
        return sum(f.tangent_dim for f in self.factors)

    def _split(self, v):
        out, k = [], 0
        for f in self.factors:
            out.append(np.asarray(v[k:k + f.tangent_dim], float))
            k += f.tangent_dim
        return out

    def log(self, x, y):
        if not self.has_log:
            return super().log(x, y)
        return np.concatenate([f.log(a, b) for f, a, b in zip(self.factors, x, y)])

    def exp(self, x, v):
        if not self.has_log:
            return super().exp(x, v)
        return tuple(f.exp(a, vi) for f, a, vi in zip(self.factors, x, self._split(v)))

    def _barycenter(self, points, weights, tol, max_iter):
        return tuple(f.barycenter([p[i] for p in points], weights, tol, max_iter)
                     for i, f in enumerate(self.factors))

    def random_point(self, rng, scale=1.0):
        return tuple(f.random_point(rng, scale) for f in self.factors)

    def neighbors(self, x, h):
        out = []
        for i, f in enumerate(self.factors):
            for y in f.neighbors(x[i], h):
                out.append(x[:i] + (y,) + x[i + 1:])
        return out

    def sample_ball(self, x, r, rng):
        # split the radius budget across factors along a random unit direction
        share = np.abs(rng.normal(size=len(self.factors)))
        share /= np.linalg.norm(share)
        return tuple(f.sample_ball(xi, r * s, rng) if s > 0 else xi
                     for f, xi, s in zip(self.factors, x, share))

    def descriptor(self):
        return {"kind": "product", "factors": [f.descriptor() for f in self.factors]}

    def point_to_json(self, x):
        return [f.point_to_json(xi) for f, xi in zip(self.factors, x)]

    def point_from_json(self, obj):
        if not isinstance(obj, list) or len(obj) != len(self.factors):
            raise SchemaError(f"product point must be a list of {len(self.factors)} points")
        return tuple(f.point_from_json(o) for f, o in zip(self.factors, obj))


class RescaledSpace(Cat0Space):
    """The same points with every distance multiplied by ``scale``."""

    kind = "rescaled"

    def __init__(self, base: Cat0Space, scale: float):
        scale = float(scale)
        if not (scale > 0) or math.isinf(scale):
            raise DomainError(f"rescaling factor must be positive and finite, got {scale}")
        self.base = base
        self.scale = scale
        self.has_log = base.has_log

    def validate(self, x):
        self.base.validate(x)

    def distance(self, x, y):
        return self.scale * self.base.distance(x, y)

    def _geodesic(self, x, y, t):
        return self.base.geodesic_point(x, y, t)

    @property
    def tangent_dim(self):
        return self.base.tangent_dim

    def log(self, x, y):
        return self.scale * self.base.log(x, y)

    def exp(self, x, v):
        return self.base.exp(x, np.asarray(v, float) / self.scale)

    def _barycenter(self, points, weights, tol, max_iter):
        return self.base.barycenter(points, weights, tol / self.scale, max_iter)

    def random_point(self, rng, scale=1.0):
        return self.base.random_point(rng, scale / self.scale)

    def neighbors(self, x, h):
        return self.base.neighbors(x, h / self.scale)

    def sample_ball(self, x, r, rng):
        return self.base.sample_ball(x, r / self.scale, rng)

    def descriptor(self):
        return {"kind": "rescaled", "lambda": self.scale, "base": self.base.descriptor()}

    def point_to_json(self, x):
        return self.base.point_to_json(x)

    def point_from_json(self, obj):
        return self.base.point_from_json(obj)
