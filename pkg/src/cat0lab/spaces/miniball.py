"""Smallest enclosing ball of a finite point set in R^k (Welzl's algorithm)."""

from __future__ import annotations

import numpy as np

_EPS = 1e-12


def _ball_from(boundary: list[np.ndarray], dim: int):
    if not boundary:
        return np.zeros(dim), -1.0
    p0 = boundary[0]
    if len(boundary) == 1:
        return p0.copy(), 0.0
    A = np.stack([p - p0 for p in boundary[1:]], axis=1)
    M = A.T @ A
    rhs = 0.5 * np.diag(M)
    lam = np.linalg.lstsq(M, rhs, rcond=None)[0]
    c = p0 + A @ lam
    return c, float(max(np.linalg.norm(c - p) for p in boundary))


def _contains(c, r, p):
    return r >= 0 and np.linalg.norm(p - c) <= r * (1 + _EPS) + _EPS


def smallest_enclosing_ball(points, seed: int = 0):
    """Return (center, radius) of the minimal ball containing ``points``."""
    pts = [np.asarray(p, dtype=float) for p in points]
    if not pts:
        raise ValueError("empty point set")
    dim = pts[0].shape[0]
    order = np.random.default_rng(seed).permutation(len(pts))
    pts = [pts[i] for i in order]

    def welzl(n: int, boundary: list):
        if n == 0 or len(boundary) == dim + 1:
            return _ball_from(boundary, dim)
        p = pts[n - 1]
        c, r = welzl(n - 1, boundary)
        if _contains(c, r, p):
            return c, r
        return welzl(n - 1, boundary + [p])

    c, r = welzl(len(pts), [])
    return c, float(max(np.linalg.norm(p - c) for p in pts))
