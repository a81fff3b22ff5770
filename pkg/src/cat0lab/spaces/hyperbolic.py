"""The hyperbolic plane in the upper half-plane model.

Points are Python complex numbers with positive imaginary part.  Geodesics
are computed by moving the base point to the centre of the Poincare disk
with T(u) = (u - z) / (u - conj(z)); a point at distance D from z maps to a
point of modulus tanh(D / 2), so interpolation is a radial rescaling.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, SchemaError
from .base import Cat0Space


def _to_disk(z: complex, w: complex) -> complex:
    return (w - z) / (w - z.conjugate())


def _from_disk(z: complex, W: complex) -> complex:
    u = (z - z.conjugate() * W) / (1 - W)
    return complex(u.real, abs(u.imag))


class HyperbolicPlane(Cat0Space):
    kind = "hyperbolic_plane"
    has_log = True

    def point(self, x: float, y: float | None = None) -> complex:
        z = complex(x) if y is None else complex(x, y)
        self.validate(z)
        return z

    def validate(self, z):
        if not isinstance(z, complex) or not (z.imag > 0) or not math.isfinite(z.real) \
                or not math.isfinite(z.imag):
            raise DomainError(f"not a point of the upper half-plane: {z!r}")

    def distance(self, z, w) -> float:
        return 2.0 * math.asinh(abs(z - w) / (2.0 * math.sqrt(z.imag * w.imag)))

    def _geodesic(self, z, w, t):
        W = _to_disk(z, w)
        r = abs(W)
        if r == 0.0:
            return z
        D = 2.0 * math.atanh(r)
        return _from_disk(z, W / r * math.tanh(t * D / 2.0))

    def log(self, z, w):
        W = _to_disk(z, w)
        r = abs(W)
        if r == 0.0:
            return np.zeros(2)
        v = 2.0 * math.atanh(r) * 1j * (W / r)
        return np.array([v.real, v.imag])

    def exp(self, z, v):
        c = complex(float(v[0]), float(v[1]))
        D = abs(c)
        if D == 0.0:
            return z
        return _from_disk(z, (-1j * c / D) * math.tanh(D / 2.0))

    @property
    def tangent_dim(self):
        return 2

    def random_point(self, rng, scale=1.0):
        return complex(rng.uniform(-scale, scale), math.exp(rng.uniform(-scale, scale)))

    def neighbors(self, z, h):
        return [self.exp(z, h * np.array(d)) for d in ((1, 0), (-1, 0), (0, 1), (0, -1))]

    def sample_ball(self, z, r, rng):
        theta = rng.uniform(0, 2 * math.pi)
        D = r * math.sqrt(rng.uniform())
        return self.exp(z, D * np.array([math.cos(theta), math.sin(theta)]))

    def descriptor(self):
        return {"kind": "hyperbolic_plane"}

    def point_to_json(self, z):
        return [z.real, z.imag]

    def point_from_json(self, obj):
        try:
            x, y = obj
            return self.point(float(x), float(y))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad half-plane point {obj!r}: {exc}") from None

