"""Barycenters, circumcenters, Busemann functions and simplex tests on CAT(0) spaces."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError, DomainError, ResourceError, SchemaError
from .base import Cat0Space
from .composite import ProductSpace, RescaledSpace
from .euclidean import EuclideanSpace
from .hyperbolic import HyperbolicPlane
from .miniball import smallest_enclosing_ball
from .tree import MetricTree, TreePoint

WEIGHT_SUM_TOL = 1e-12


@dataclass
class WeightedPointSet:
    space: Cat0Space
    points: list
    weights: np.ndarray

    def __post_init__(self):
        self.points = list(self.points)
        self.weights = np.asarray(self.weights, dtype=float)
        if not self.points:
            raise DomainError("weighted point set must be nonempty")
        if self.weights.shape != (len(self.points),):
            raise DomainError("need exactly one weight per point")
        if np.any(self.weights < 0):
            raise DomainError("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"weights sum to {self.weights.sum()!r}, not 1")
        for p in self.points:
            self.space.validate(p)

    @classmethod
    def normalized(cls, space, points, weights=None):
        points = list(points)
        w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
        if w.sum() <= 0:
            raise DomainError("weights must have positive total")
        return cls(space, points, w / w.sum())

    def objective(self, y) -> float:
        return self.space.objective(self.points, self.weights, y)


def barycenter(ws: WeightedPointSet, tol: float = 1e-12, max_iter: int = 10_000):
    """Minimizer of y -> sum_i a_i d(x_i, y)^2."""
    if not tol > 0:
        raise DomainError("barycenter tolerance must be positive")
    return ws.space.barycenter(ws.points, ws.weights, tol, max_iter)


# -- circumcenter ------------------------------------------------------------------

def _max_dist(space, pts, y):
    return max(space.distance(y, x) for x in pts)


def _softmax_stage(space, pts, y, temp, steps=100):
    """Armijo descent on temp * log sum exp(d(y, x_i) / temp)."""
    def surrogate(z):
        d = np.array([space.distance(z, x) for x in pts])
        m = d.max()
        return m + temp * math.log(np.exp((d - m) / temp).sum()), d

    f, d = surrogate(y)
    eta = max(d.max(), 1e-12)
    for _ in range(steps):
        w = np.exp((d - d.max()) / temp)
        w /= w.sum()
        g = np.zeros(space.tangent_dim)
        for wi, di, x in zip(w, d, pts):
            if di > 0:
                g -= wi * space.log(y, x) / di
        gn = float(np.linalg.norm(g))
        if gn < 1e-14:
            break
        while eta > 1e-14:
            cand = space.exp(y, -eta * g / gn)
            fc, dc = surrogate(cand)
            if fc < f - 1e-4 * eta * gn:
                y, f, d = cand, fc, dc
                eta *= 2.0
                break
            eta *= 0.5
        else:
            break
    return y


def _minimax_polish(space, pts, y, tol, max_iter=500):
    """Repeatedly move to the centre of the smallest ball enclosing log_y(x_i)."""
    r = _max_dist(space, pts, y)
    step = math.inf
    for _ in range(max_iter):
        c, _ = smallest_enclosing_ball([space.log(y, x) for x in pts])
        step = float(np.linalg.norm(c))
        if step <= tol:
            return y
        theta = 1.0
        while theta > 1e-6:
            cand = space.exp(y, theta * c)
            rc = _max_dist(space, pts, cand)
            if rc <= r:
                break
            theta *= 0.5
        else:
            break
        y, r = cand, rc
    raise ConvergenceError("circumcenter did not converge", last_iterate=y, grad_norm=step)


def _pattern_minimax(space, pts, y, tol, max_iter=100_000):
    r = _max_dist(space, pts, y)
    h = max(r / 2.0, tol)
    for _ in range(max_iter):
        if h < tol:
            return y
        best = min(((_max_dist(space, pts, z), i, z) for i, z in enumerate(space.neighbors(y, h))),
                   key=lambda t: t[:2])
        if best[0] < r:
            r, y = best[0], best[2]
        else:
            h /= 2.0
    raise ConvergenceError("circumcenter pattern search hit its iteration cap", last_iterate=y,
                           grad_norm=h)


def circumcenter(space: Cat0Space, points, tol: float = 1e-10):
    """(center, radius) minimizing y -> max_i d(y, x_i)."""
    pts = list(points)
    if not pts:
        raise DomainError("circumcenter of an empty set")
    for p in pts:
        space.validate(p)
    if len(pts) == 1:
        return pts[0], 0.0
    if isinstance(space, RescaledSpace):
        c, r = circumcenter(space.base, pts, tol / space.scale)
        return c, space.scale * r
    if isinstance(space, MetricTree):
        return space.circumcenter(pts)
    y = space.barycenter(pts, np.full(len(pts), 1.0 / len(pts)))
    if space.has_log:
        r0 = _max_dist(space, pts, y)
        if r0 == 0.0:
            return y, 0.0
        for k in range(1, 5):
            y = _softmax_stage(space, pts, y, r0 * 4.0 ** (-k))
        y = _minimax_polish(space, pts, y, tol)
    else:
        y = _pattern_minimax(space, pts, y, tol)
    return y, _max_dist(space, pts, y)


# -- Busemann functions ---------------------------------------------------------------

@dataclass
class BusemannDirection:
    """A geodesic ray gamma (unit speed) in a space, representing a point at infinity.

    ``data`` is kind specific: a unit vector and base point (Euclidean), the
    boundary point in R or inf (hyperbolic plane), a ray edge index (tree),
    a list of factor directions plus unit coefficient vector (product), or
    the base direction (rescaled).
    """

    space: Cat0Space
    data: dict = field(default_factory=dict)

    # constructors
    @classmethod
    def euclidean(cls, space: EuclideanSpace, u, base=None):
        u = np.asarray(u, dtype=float)
        n = np.linalg.norm(u)
        if u.shape != (space.dim,) or n == 0:
            raise DomainError("Euclidean direction must be a nonzero vector of the right size")
        base = np.zeros(space.dim) if base is None else np.asarray(base, float)
        return cls(space, {"u": u / n, "base": base})

    @classmethod
    def hyperbolic(cls, space: HyperbolicPlane, xi):
        xi = float(xi)
        if math.isnan(xi) or xi == -math.inf:
            raise DomainError("boundary point must be a real number or +inf")
        return cls(space, {"xi": xi})

    @classmethod
    def tree_ray(cls, space: MetricTree, edge: int):
        if not (0 <= edge < len(space.edges)) or not space.edges[edge].is_ray:
            raise DomainError(f"edge {edge} is not a ray of the tree")
        return cls(space, {"edge": edge})

    @classmethod
    def product(cls, space: ProductSpace, directions, coefficients):
        c = np.asarray(coefficients, dtype=float)
        if len(directions) != len(space.factors) or c.shape != (len(space.factors),):
            raise DomainError("need one direction and one coefficient per factor")
        if np.any(c < 0) or abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise DomainError("product direction coefficients must be a nonnegative unit vector")
        return cls(space, {"directions": list(directions), "c": c})

    @classmethod
    def rescaled(cls, space: RescaledSpace, base_direction):
        return cls(space, {"base": base_direction})

    # the ray itself
    def ray(self, t: float):
        s, d = self.space, self.data
        if isinstance(s, EuclideanSpace):
            return d["base"] + t * d["u"]
        if isinstance(s, HyperbolicPlane):
            if math.isinf(d["xi"]):
                return complex(0.0, math.exp(t))
            return complex(d["xi"], math.exp(-t))
        if isinstance(s, MetricTree):
            return TreePoint(d["edge"], float(t))
        if isinstance(s, ProductSpace):
            return tuple(xi.ray(ci * t) for xi, ci in zip(d["directions"], d["c"]))
        if isinstance(s, RescaledSpace):
            return d["base"].ray(t / s.scale)
        raise DomainError(f"no rays for {s.kind}")

    def horofunction(self, x):
        """lim_t d(x, gamma(t)) - t in closed form, or None if unavailable."""
        s, d = self.space, self.data
        if isinstance(s, EuclideanSpace):
            return -float(np.dot(np.asarray(x, float) - d["base"], d["u"]))
        if isinstance(s, HyperbolicPlane):
            if math.isinf(d["xi"]):
                return -math.log(x.imag)
            w = -1.0 / (x - d["xi"])
            return -math.log(w.imag)
        if isinstance(s, MetricTree):
            e = s.edges[d["edge"]]
            if x.edge == d["edge"]:
                return -x.offset
            return s.distance(x, s.vertex_point(e.u))
        if isinstance(s, RescaledSpace):
            h = d["base"].horofunction(x)
            return None if h is None else s.scale * h
        if isinstance(s, ProductSpace):
            # d(x, gamma(t))^2 = sum_i (c_i t + h_i(x_i) + o(1))^2 = (t + sum_i c_i h_i(x_i))^2 + O(1)
            parts = [xi.horofunction(p) if ci > 0 else 0.0
                     for xi, ci, p in zip(d["directions"], d["c"], x)]
            if any(h is None for h in parts):
                return None
            return float(np.dot(d["c"], parts))
        return None


def busemann_numeric(xi: BusemannDirection, x, y, tol: float = 1e-6, k_max: int = 60,
                     depth: int = 12):
    """Limit of d(x, gamma(t)) - d(y, gamma(t)) along t = 2^k.

    The differences have an expansion in powers of 1/t (or converge faster),
    so a Romberg table of depth ``depth`` extrapolates the samples.  Returns
    (value, error estimate); stops once the last two columns agree to tol / 4
    on two consecutive rows and raises ConvergenceError if that never happens
    (including when the ray leaves floating point range first).
    """
    space = xi.space
    rows: list[list[float]] = []
    for k in range(k_max + 1):
        try:
            g = xi.ray(2.0 ** k)
            v = space.distance(x, g) - space.distance(y, g)
        except OverflowError:
            break
        row = [v]
        for j in range(1, min(k, depth) + 1):
            f = 2.0 ** j
            row.append((f * row[j - 1] - rows[-1][j - 1]) / (f - 1.0))
        if len(row) > 2 and len(rows[-1]) > 2:
            # the same-row estimate must be small on two rows, and the diagonal settled
            err = abs(row[-1] - row[-2])
            prev_err = abs(rows[-1][-1] - rows[-1][-2])
            if max(err, prev_err) < tol / 4.0 and abs(row[-1] - rows[-1][-1]) < tol:
                return row[-1], max(err, prev_err)
        rows.append(row)
    raise ConvergenceError("Busemann limit did not settle", last_iterate=rows[-1][-1] if rows else None,
                           grad_norm=None)


def busemann_value(xi: BusemannDirection, x, y, tol: float = 1e-6) -> float:
    """b_xi(x, y) = lim_t [d(x, gamma(t)) - d(y, gamma(t))]."""
    space = xi.space
    space.validate(x)
    space.validate(y)
    hx = xi.horofunction(x)
    if hx is not None:
        return hx - xi.horofunction(y)
    return busemann_numeric(xi, x, y, tol)[0]


# -- simplices -----------------------------------------------------------------------

def _compositions(total: int, parts: int, positive: bool):
    """Integer vectors of length ``parts`` summing to ``total``."""
    lo = 1 if positive else 0
    if parts == 1:
        if total >= lo:
            yield (total,)
        return
    for first in range(lo, total - lo * (parts - 1) + 1):
        for rest in _compositions(total - first, parts - 1, positive):
            yield (first,) + rest


def _refine_on_face(space, points, face, beta, target, tol, h0):
    """Pattern search over weights supported on ``face`` to approach ``target``."""
    beta = beta.copy()
    best = space.distance(space.barycenter(points, beta), target)
    h = h0
    while h > 1e-10 and best > tol:
        improved = False
        for i, j in itertools.permutations(face, 2):
            if beta[i] <= 0.0:
                continue
            step = min(h, beta[i])
            cand = beta.copy()
            cand[i] -= step
            cand[j] += step
            d = space.distance(space.barycenter(points, cand), target)
            if d < best:
                beta, best, improved = cand, d, True
        if not improved:
            h /= 2.0
    return best


def simplex_is_degenerate(space: Cat0Space, points, tol: float = 1e-6, grid: int = 21,
                          budget: int = 200_000) -> bool:
    """Sampling test: is every interior barycentric image also a boundary image?

    Interior and boundary weight vectors come from a grid with ``grid``
    points per edge of the standard simplex; an interior image that is not
    within ``tol`` of a boundary grid image is chased by a local search on
    the nearest faces before the simplex is declared nondegenerate.
    """
    pts = list(points)
    k = len(pts)
    if k < 2:
        raise DomainError("a simplex needs at least two vertices")
    if grid < 3:
        raise DomainError("grid must have at least 3 points per edge")
    m = grid - 1
    interior_count = math.comb(m - 1, k - 1)
    boundary_count = k * math.comb(m + k - 2, k - 2)
    if interior_count + boundary_count > budget:
        raise ResourceError(f"simplex sampling needs {interior_count + boundary_count} points, "
                            f"budget is {budget}")
    boundary = []
    for drop in range(k):
        face = [i for i in range(k) if i != drop]
        for comp in _compositions(m, k - 1, positive=False):
            beta = np.zeros(k)
            beta[face] = np.array(comp, float) / m
            boundary.append((tuple(face), beta, space.barycenter(pts, beta)))
    for comp in _compositions(m, k, positive=True):
        alpha = np.array(comp, float) / m
        target = space.barycenter(pts, alpha)
        dists = np.array([space.distance(img, target) for _, _, img in boundary])
        if dists.min() <= tol:
            continue
        matched = False
        for idx in np.argsort(dists)[:3]:
            face, beta, _ = boundary[idx]
            if _refine_on_face(space, pts, face, beta, target, tol, 1.0 / m) <= tol:
                matched = True
                break
        if not matched:
            return False
    return True


# -- rescaling, descriptors, self checks ---------------------------------------------------

def rescale(space: Cat0Space, lam: float) -> RescaledSpace:
    return RescaledSpace(space, lam)


def space_from_descriptor(desc) -> Cat0Space:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise SchemaError("space descriptor must be an object with a 'kind'")
    kind = desc["kind"]
    allowed = {"euclidean": {"kind", "dim"}, "metric_tree": {"kind", "edges"},
               "hyperbolic_plane": {"kind"}, "product": {"kind", "factors"},
               "rescaled": {"kind", "base", "lambda"}}
    if kind not in allowed:
        raise SchemaError(f"unknown space kind {kind!r}")
    extra = set(desc) - allowed[kind]
    if extra:
        raise SchemaError(f"unknown keys {sorted(extra)} in {kind} descriptor")
    try:
        if kind == "euclidean":
            return EuclideanSpace(desc["dim"])
        if kind == "metric_tree":
            return MetricTree(desc["edges"])
        if kind == "hyperbolic_plane":
            return HyperbolicPlane()
        if kind == "product":
            return ProductSpace([space_from_descriptor(f) for f in desc["factors"]])
        return RescaledSpace(space_from_descriptor(desc["base"]), desc["lambda"])
    except KeyError as exc:
        raise SchemaError(f"{kind} descriptor is missing {exc}") from None
    except DomainError as exc:
        raise SchemaError(str(exc)) from None


def cn_defect(space: Cat0Space, x, a, b) -> float:
    """½d(x,a)² + ½d(x,b)² − ¼d(a,b)² − d(x,m)²; nonnegative in a CAT(0) space."""
    m = space.midpoint(a, b)
    return (0.5 * space.distance(x, a) ** 2 + 0.5 * space.distance(x, b) ** 2
            - 0.25 * space.distance(a, b) ** 2 - space.distance(x, m) ** 2)


@dataclass
class SpaceCheckReport:
    samples: int
    tol: float
    metric_violations: int = 0
    cn_violations: int = 0
    geodesic_violations: int = 0
    worst_cn_defect: float = 0.0

    @property
    def passed(self) -> bool:
        return self.metric_violations == self.cn_violations == self.geodesic_violations == 0

    def to_dict(self):
        return {"samples": self.samples, "tol": self.tol,
                "metric_violations": self.metric_violations,
                "cn_violations": self.cn_violations,
                "geodesic_violations": self.geodesic_violations,
                "worst_cn_defect": self.worst_cn_defect, "passed": self.passed}


def check_space(space: Cat0Space, samples: int = 10_000, seed: int = 0, tol: float = 1e-9,
                scale: float = 1.0) -> SpaceCheckReport:
    """Metric axioms, CN inequality and geodesic parametrization on random triples."""
    rng = np.random.default_rng(seed)
    rep = SpaceCheckReport(samples, tol)
    for _ in range(samples):
        x, y, z = (space.random_point(rng, scale) for _ in range(3))
        dxy, dyz, dxz = space.distance(x, y), space.distance(y, z), space.distance(x, z)
        if (dxy < -tol or abs(dxy - space.distance(y, x)) > tol or space.distance(x, x) > tol
                or dxz > dxy + dyz + tol):
            rep.metric_violations += 1
        defect = cn_defect(space, x, y, z)
        rep.worst_cn_defect = min(rep.worst_cn_defect, defect)
        if defect < -tol:
            rep.cn_violations += 1
        t = float(rng.uniform())
        g = space.geodesic_point(x, y, t)
        if abs(space.distance(x, g) - t * dxy) > tol * max(1.0, dxy):
            rep.geodesic_violations += 1
    return rep
