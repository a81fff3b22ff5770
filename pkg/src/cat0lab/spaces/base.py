"""Common interface of the model CAT(0) spaces."""

from __future__ import annotations

import numpy as np

from ..errors import ConvergenceError, DomainError

BARYCENTER_MAX_ITER = 10_000


class Cat0Space:
    """A complete CAT(0) space with closed-form distances and geodesics.

    Spaces with a Riemannian structure additionally provide ``log``/``exp``
    in an orthonormal frame at the base point (``has_log`` is True); the
    generic barycenter and circumcenter solvers are written against that.
    """

    kind = "abstract"
    has_log = False

    # -- required -------------------------------------------------------------
    def distance(self, x, y) -> float:
        raise NotImplementedError

    def _geodesic(self, x, y, t: float):
        raise NotImplementedError

    def validate(self, x):
        """Raise DomainError unless ``x`` is a valid point of this space."""
        raise NotImplementedError

    def random_point(self, rng: np.random.Generator, scale: float = 1.0):
        raise NotImplementedError

    def neighbors(self, x, h: float) -> list:
        """Points reached by moving distance (at most) h from x in each basic direction."""
        raise NotImplementedError

    def sample_ball(self, x, r: float, rng: np.random.Generator):
        """A random point at distance < r from x."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def point_to_json(self, x):
        raise NotImplementedError

    def point_from_json(self, obj):
        raise NotImplementedError

    # -- optional Riemannian structure ----------------------------------------
    def log(self, x, y) -> np.ndarray:
        raise DomainError(f"{self.kind} has no logarithm map")

    def exp(self, x, v):
        raise DomainError(f"{self.kind} has no exponential map")

    @property
    def tangent_dim(self) -> int:
        raise DomainError(f"{self.kind} has no tangent space")

    # -- derived --------------------------------------------------------------
    def geodesic_point(self, x, y, t: float):
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"geodesic parameter t={t} outside [0, 1]")
        if t == 0.0:
            return x
        if t == 1.0:
            return y
        return self._geodesic(x, y, t)

    def midpoint(self, x, y):
        return self.geodesic_point(x, y, 0.5)

    def same_space(self, other) -> bool:
        return isinstance(other, Cat0Space) and self.descriptor() == other.descriptor()

    def objective(self, points, weights, y) -> float:
        return float(sum(w * self.distance(x, y) ** 2 for x, w in zip(points, weights)))

    def barycenter(self, points, weights, tol: float = 1e-12, max_iter: int = BARYCENTER_MAX_ITER):
        """Minimizer of y -> sum_i w_i d(x_i, y)^2 (weights already normalized)."""
        nz = [(x, w) for x, w in zip(points, weights) if w > 0]
        if len(nz) == 1:
            return nz[0][0]
        if len(nz) == 2:
            (x0, w0), (x1, w1) = nz
            return self.geodesic_point(x0, x1, w1 / (w0 + w1))
        return self._barycenter(points, weights, tol, max_iter)

    def _barycenter(self, points, weights, tol, max_iter):
        if not self.has_log:
            raise DomainError(f"no barycenter solver for {self.kind}")
        return riemannian_barycenter(self, points, weights, tol, max_iter)

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()})"


def riemannian_barycenter(space, points, weights, tol, max_iter, start=None):
    """Damped gradient descent y <- exp_y(theta * sum_i w_i log_y(x_i)).

    The Riemannian gradient of sum_i w_i d(x_i, .)^2 is -2 sum_i w_i log_y(x_i);
    theta starts at 1 (the exact step in flat space) and is halved whenever
    the objective would increase.
    """
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    y = start if start is not None else points[int(np.argmax(w))]
    f = space.objective(points, w, y)
    theta = 1.0
    gnorm = np.inf
    for _ in range(max_iter):
        g = sum(wi * space.log(y, x) for x, wi in zip(points, w))
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            return y
        while True:
            cand = space.exp(y, theta * g)
            fc = space.objective(points, w, cand)
            if fc <= f + 1e-15 * max(1.0, f) or theta < 1e-12:
                break
            theta *= 0.5
        if fc > f and theta < 1e-12:
            break
        y, f = cand, fc
        theta = min(1.0, 2.0 * theta)
    raise ConvergenceError("barycenter did not converge", last_iterate=y, grad_norm=gnorm)
