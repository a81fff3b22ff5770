"""Energy minimization, fixed-point search, the halving search for small
displacement, and mu-Laplacians of pulled-back functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from statistics import median

import numpy as np

from .actions import EnergyReport, EquivariantMap, IsometricAction, displacement, energy, energy_value
from .errors import DomainError
from .groups import GroupElement, ball
from .measures import FiniteSupportMeasure
from .spaces import (BusemannDirection, EuclideanSpace, HyperbolicPlane, MetricTree, ProductSpace,
                     RescaledSpace, busemann_value, circumcenter)

CONVERGED = "converged"
ESCAPED = "escaped"
CAPPED = "iteration-capped"
CROSSING_MARGIN = 1e-6


@dataclass
class MinimizeResult:
    map: EquivariantMap
    report: EnergyReport
    status: str
    iterates: list
    energies: list
    steps: list
    escape_radius: float

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1

    def to_dict(self, trace: bool = False):
        space = self.map.action.space
        out = {"status": self.status, "iterations": self.iterations,
               "energy": self.report.energy, "lower_bound": self.report.lower_bound,
               "basepoint": space.point_to_json(self.map.basepoint),
               "escape_radius": self.escape_radius,
               "distance_from_start": space.distance(self.iterates[0], self.iterates[-1])}
        if trace:
            out["iterates"] = [space.point_to_json(x) for x in self.iterates]
            out["energies"] = list(self.energies)
        return out


def minimize_energy(action: IsometricAction, mu: FiniteSupportMeasure, start, tol: float = 1e-10,
                    max_iter: int = 10_000, theta: float = 0.5, escape_radius: float | None = None,
                    escape_factor: float = 4.0, window: int = 50) -> MinimizeResult:
    """Damped orbit-barycenter iteration x <- gamma(x, bar_mu(orbit of x), theta).

    All thresholds are relative to the starting displacement delta0, so the
    run on a rescaled copy of the space visits the same points:

    * converged: a step shorter than ``tol * delta0`` (or no descent at all);
    * escaped: the iterate is farther than the escape radius from the start
      (``escape_factor * delta0`` unless given), energy is still dropping
      and the last ``window`` step lengths shrink by a ratio >= 0.999 (a
      geometric approach to a finite minimizer would show ratios near theta);
    * iteration-capped otherwise.
    """
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    if not 0 < theta <= 1:
        raise DomainError("damping theta must lie in (0, 1]")
    space = action.space
    space.validate(start)
    support = list(mu.weights)
    w = np.array([float(v) for v in mu.weights.values()])
    delta0 = displacement(action, start)
    R = escape_factor * delta0 if escape_radius is None else float(escape_radius)
    x, E = start, energy_value(action, mu, start)
    iterates, energies, steps = [x], [E], []
    status = CAPPED
    if delta0 == 0.0:
        status = CONVERGED
    while status == CAPPED and len(steps) < max_iter:
        target = space.barycenter([action.apply(g, x) for g in support], w)
        th = theta
        while True:
            cand = space.geodesic_point(x, target, th)
            Ec = energy_value(action, mu, cand)
            if Ec <= E * (1 + 1e-12):
                break
            th /= 2.0
            if th < 1e-12:
                cand = None
                break
        if cand is None:
            status = CONVERGED
            break
        step = space.distance(x, cand)
        x, E = cand, Ec
        iterates.append(x)
        energies.append(E)
        steps.append(step)
        if step <= tol * delta0:
            status = CONVERGED
        elif len(steps) > window and space.distance(start, x) > R:
            recent = steps[-window - 1:]
            ratios = [b / a for a, b in zip(recent, recent[1:]) if a > 0]
            falling = energies[-1] < energies[-window - 1]
            if ratios and falling and median(ratios) >= 0.999:
                status = ESCAPED
    return MinimizeResult(EquivariantMap(action, x), energy(action, mu, x), status, iterates,
                          energies, steps, R)


# -- fixed points ---------------------------------------------------------------------

@dataclass
class FixedPointResult:
    found: bool
    point: object
    method: str
    minimizer_status: str
    iterations: int
    delta_inf: float
    energy_inf: float
    orbit_diameter: float | None
    diagnosis: str

    def to_dict(self, space):
        return {"found": self.found,
                "point": space.point_to_json(self.point) if self.point is not None else None,
                "method": self.method, "minimizer_status": self.minimizer_status,
                "iterations": self.iterations, "delta_inf": self.delta_inf,
                "energy_inf": self.energy_inf, "orbit_diameter": self.orbit_diameter,
                "diagnosis": self.diagnosis}


def _orbit_elements(group, radius: int):
    if group.is_finite():
        r = radius
        while True:
            b = ball(group, r)
            if len(b.elements) == group.order():
                return list(b.elements)
            r += 1
    return list(ball(group, radius).elements)


def _diameter(space, pts) -> float:
    return max((space.distance(p, q) for i, p in enumerate(pts) for q in pts[i + 1:]), default=0.0)


def fixed_point_search(action: IsometricAction, mu: FiniteSupportMeasure, S=None, tol: float = 1e-6,
                       start=None, orbit_radius: int = 4, diameter_cap: float = 1e6,
                       max_iter: int = 10_000) -> FixedPointResult:
    """Energy descent, then a circumcenter of a finite orbit when orbits look bounded."""
    space = action.space
    if start is None:
        start = space.random_point(np.random.default_rng(0))
    res = minimize_energy(action, mu, start, tol=1e-10, max_iter=max_iter)
    deltas = [displacement(action, p, S) for p in res.iterates]
    delta_inf, energy_inf = min(deltas), min(res.energies)
    x = res.map.basepoint

    def result(found, point, method, diam, diagnosis):
        return FixedPointResult(found, point, method, res.status, res.iterations, delta_inf,
                                energy_inf, diam, diagnosis)

    diam = None
    if res.status != ESCAPED:
        small = _orbit_elements(action.group, orbit_radius)
        orbit = action.orbit(small, x)
        diam = _diameter(space, orbit)
        if not action.group.is_finite():
            wide = _diameter(space, action.orbit(_orbit_elements(action.group, 2 * orbit_radius), x))
            bounded = wide <= diam + tol * max(1.0, diam)
            diam = wide
        else:
            bounded = True
        if bounded and diam <= diameter_cap:
            c, _ = circumcenter(space, orbit)
            if displacement(action, c, S) < tol:
                return result(True, c, "circumcenter", diam, "bounded orbit")
    if res.status == CONVERGED and res.report.energy < tol ** 2:
        return result(True, x, "energy", diam, "energy minimizer with zero energy")
    if res.status == ESCAPED:
        why = "minimizing sequence escapes: energy keeps decreasing far from the start"
    elif diam is not None and diam > diameter_cap:
        why = "orbit diameter exceeds the cap"
    else:
        why = "orbit of the best iterate is unbounded; displacement bounded below"
    return result(False, None, "none", diam, why)


# -- halving search -------------------------------------------------------------------

@dataclass
class ShalomCertificate:
    n: int
    v_n: object
    r_n: float
    delta_at_vn: float
    sampled_min_delta_in_ball: float
    sample_count: int
    level: int
    label: str = "sampled"

    def checks(self) -> dict:
        return {"delta_at_vn <= r_n/n": self.delta_at_vn <= self.r_n / self.n,
                "sampled_min >= r_n/(2n)": self.sampled_min_delta_in_ball >= self.r_n / (2 * self.n)}

    def holds(self) -> bool:
        return all(self.checks().values())

    def to_dict(self, space):
        return {"n": self.n, "v_n": space.point_to_json(self.v_n), "r_n": self.r_n,
                "delta_at_vn": self.delta_at_vn,
                "sampled_min_delta_in_ball": self.sampled_min_delta_in_ball,
                "sample_count": self.sample_count, "level": self.level, "label": self.label,
                "checks": self.checks()}


@dataclass
class ShalomResult:
    status: str  # "certificate", "fixed point found", "delta bounded below", "inconclusive"
    n: int
    certificate: ShalomCertificate | None = None
    point: object = None
    delta_bound: float | None = None
    evaluations: int = 0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self, space):
        return {"status": self.status, "n": self.n,
                "certificate": self.certificate.to_dict(space) if self.certificate else None,
                "point": space.point_to_json(self.point) if self.point is not None else None,
                "delta_bound": self.delta_bound, "evaluations": self.evaluations,
                "diagnostics": self.diagnostics}


class _BudgetExhausted(Exception):
    pass


class _DeltaOracle:
    """Counts displacement evaluations against a budget."""

    def __init__(self, action, S, budget):
        self.action, self.S, self.budget = action, S, budget
        self.count = 0

    def __call__(self, x) -> float:
        if self.count >= self.budget:
            raise _BudgetExhausted
        self.count += 1
        return displacement(self.action, x, self.S)


def _descent_path(space, delta, start, max_steps, h_max, stall, radius):
    """Pattern search on delta inside B(start, radius).

    Returns (accepted points, their deltas, stalled); stalled is False when
    the step budget ran out or the search pressed against the radius.
    """
    x, dx = start, delta(start)
    path, vals = [x], [dx]
    h = h_max
    for _ in range(max_steps):
        if dx == 0.0:
            return path, vals, True
        cands = []
        for i, z in enumerate(space.neighbors(x, h)):
            if space.distance(start, z) > radius:
                return path, vals, False
            cands.append((delta(z), i, z))
        dz, _, z = min(cands, key=lambda t: t[:2])
        if dz < dx:
            x, dx = z, dz
            path.append(x)
            vals.append(dx)
            h = min(2.0 * h, h_max)
        else:
            h /= 2.0
            if h < stall:
                return path, vals, True
    return path, vals, False


def _first_crossing(space, delta, path, vals, level):
    """A point with delta <= level, bisected on the geodesic where the path first crosses it."""
    j = next(i for i, v in enumerate(vals) if v <= level)
    if j == 0:
        return path[0], vals[0]
    lo, hi = 0.0, 1.0
    a, b = path[j - 1], path[j]
    best = (b, vals[j])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        p = space.geodesic_point(a, b, mid)
        dp = delta(p)
        if dp <= level:
            hi, best = mid, (p, dp)
        else:
            lo = mid
    return best


def _ball_search(space, delta, center, r, level, starts, rng, steps_per_start=60):
    """Multi-start pattern search inside B(center, r) for delta <= level.

    Returns (point or None, list of every evaluated delta)."""
    seen = []
    points = [center] + [space.sample_ball(center, r, rng) for _ in range(starts - 1)]
    for x in points:
        dx = delta(x)
        seen.append(dx)
        if dx <= level:
            return x, seen
        h = r / 2.0
        for _ in range(steps_per_start):
            cands = [z for z in space.neighbors(x, h) if space.distance(center, z) < r]
            scored = []
            for z in cands:
                dz = delta(z)
                seen.append(dz)
                if dz <= level:
                    return z, seen
                scored.append((dz, z))
            best = min(scored, key=lambda t: t[0], default=None)
            if best is not None and best[0] < dx:
                dx, x = best
            else:
                h /= 2.0
                if h < r * 1e-4:
                    break
    return None, seen


def shalom_search(action: IsometricAction, n: int, S=None, start=None, budget: int = 200_000,
                  starts: int = 32, seed: int = 0, fixed_tol: float = 1e-9, max_level: int = 40,
                  descent_steps: int = 400, descent_radius: float = 16.0) -> ShalomResult:
    """Halving search for v_n with delta(v_n) <= r_n / n and delta >= r_n / (2n) on B(v_n, r_n).

    First estimates inf delta by pattern descent within ``descent_radius``
    times the starting displacement.  A descent that stalls at delta = 0
    (within ``fixed_tol``) reports a fixed point; one that stalls higher
    reports delta bounded below.  Otherwise w_1 is the first point of
    the descent path with delta <= 1/(2n); at level k the ball B(w_k, 2^-k)
    is searched for a point with delta <= 1/(2^(k+1) n).  If one is found it
    becomes w_{k+1}; if not, (v_n, r_n) = (w_k, 2^-k) is emitted, the ball
    bound being a sampled claim.  Passing ``max_level`` means the w_k form a
    Cauchy sequence, whose limit is a fixed point.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    space = action.space
    S = action.group.generating_set() if S is None else S
    delta = _DeltaOracle(action, S, budget)
    rng = np.random.default_rng(seed)
    if start is None:
        start = space.random_point(np.random.default_rng(seed))
    try:
        d0 = delta(start)
        h_max = max(d0, 1e-6)
        path, vals, stalled = _descent_path(space, delta, start, descent_steps, h_max,
                                            h_max * 1e-12, descent_radius * h_max)
        diag = {"descent_steps": len(path) - 1, "descent_min_delta": vals[-1], "stalled": stalled}
        if stalled and vals[-1] <= fixed_tol:
            return ShalomResult("fixed point found", n, point=path[-1], delta_bound=vals[-1],
                                evaluations=delta.count, diagnostics=diag)
        if stalled and vals[-1] > 1.0 / (2 * n):
            return ShalomResult("delta bounded below", n, point=path[-1], delta_bound=vals[-1],
                                evaluations=delta.count, diagnostics=diag)
        if vals[-1] > (1.0 - CROSSING_MARGIN) / (2 * n):
            return ShalomResult("inconclusive", n, evaluations=delta.count,
                                diagnostics={**diag, "reason": "descent never reached 1/(2n)"})
        # aim slightly inside the target so the recorded inequality does not
        # hinge on the last few ulps of the displacement computation
        w, dw = _first_crossing(space, delta, path, vals, (1.0 - CROSSING_MARGIN) / (2 * n))
        for k in range(1, max_level + 1):
            r = 2.0 ** (-k)
            level = 1.0 / (2 ** (k + 1) * n)
            z, seen = _ball_search(space, delta, w, r, level, starts, rng)
            if z is None:
                cert = ShalomCertificate(n, w, r, dw, min(seen), len(seen), k)
                return ShalomResult("certificate", n, certificate=cert, point=w,
                                    evaluations=delta.count, diagnostics=diag)
            w, dw = z, displacement(action, z, S)
        return ShalomResult("fixed point found", n, point=w, delta_bound=dw,
                            evaluations=delta.count,
                            diagnostics={**diag, "reason": "halving sequence is Cauchy"})
    except _BudgetExhausted:
        return ShalomResult("inconclusive", n, evaluations=delta.count,
                            diagnostics={"reason": f"evaluation budget {budget} exhausted"})


# -- Laplacians -----------------------------------------------------------------------

def mu_laplacian(u, mu: FiniteSupportMeasure, g: GroupElement):
    """Delta_mu u(g) = u(g) - sum_h u(g h) mu(h); exact when u and mu are rational."""
    ug = u(g)
    terms = [(u(g * h), w) for h, w in mu.weights.items()]
    if mu.exact and isinstance(ug, Rational) and all(isinstance(v, Rational) for v, _ in terms):
        return Fraction(ug) - sum(Fraction(v) * w for v, w in terms)
    return float(ug) - math.fsum(float(v) * float(w) for v, w in terms)


def pullback_horofunction(action: IsometricAction, f: EquivariantMap, xi: BusemannDirection):
    """phi(g) = b_xi(f(g), f(e))."""
    if xi.space is not action.space and xi.space.descriptor() != action.space.descriptor():
        raise DomainError("Busemann direction lives in a different space")
    fe = f.basepoint

    def phi(g: GroupElement) -> float:
        return busemann_value(xi, f(g), fe)

    return phi


def pullback(f: EquivariantMap, F):
    """g -> F(f(g)) for a function F on the space."""
    return lambda g: F(f(g))


@dataclass
class LaplacianReport:
    max_value: float
    max_abs: float
    samples: int
    tol: float
    passed: bool

    def to_dict(self):
        return {"max_laplacian": self.max_value, "max_abs_laplacian": self.max_abs,
                "samples": self.samples, "tol": self.tol, "passed": self.passed}


def _laplacians(phi, mu, sample):
    return [float(mu_laplacian(phi, mu, g)) for g in sample]


def check_mu_subharmonic(phi, mu: FiniteSupportMeasure, sample, tol: float = 1e-9) -> LaplacianReport:
    """PASS when Delta_mu phi <= tol on every sampled group element."""
    vals = _laplacians(phi, mu, list(sample))
    mx = max(vals)
    return LaplacianReport(mx, max(abs(v) for v in vals), len(vals), tol, mx <= tol)


def check_mu_harmonic(phi, mu: FiniteSupportMeasure, sample, tol: float = 1e-12) -> LaplacianReport:
    vals = _laplacians(phi, mu, list(sample))
    mabs = max(abs(v) for v in vals)
    return LaplacianReport(max(vals), mabs, len(vals), tol, mabs <= tol)


# -- convex pullbacks at harmonic maps ----------------------------------------------------

def boundary_directions(space, rng: np.random.Generator, count: int = 2) -> list[BusemannDirection]:
    """Random points at infinity with closed-form horofunctions (possibly none)."""
    if isinstance(space, EuclideanSpace):
        return [BusemannDirection.euclidean(space, rng.normal(size=space.dim) + 1e-3)
                for _ in range(count)]
    if isinstance(space, HyperbolicPlane):
        return [BusemannDirection.hyperbolic(space, math.inf)] + \
               [BusemannDirection.hyperbolic(space, rng.normal()) for _ in range(count - 1)]
    if isinstance(space, MetricTree):
        return [BusemannDirection.tree_ray(space, i) for i, e in enumerate(space.edges) if e.is_ray][:count]
    if isinstance(space, RescaledSpace):
        return [BusemannDirection.rescaled(space, d) for d in boundary_directions(space.base, rng, count)]
    if isinstance(space, ProductSpace):
        per_factor = [boundary_directions(f, rng, count) for f in space.factors]
        if any(not dirs for dirs in per_factor):
            return []
        out = []
        for k in range(count):
            c = np.abs(rng.normal(size=len(space.factors))) + 1e-3
            out.append(BusemannDirection.product(space, [d[k % len(d)] for d in per_factor],
                                                 c / np.linalg.norm(c)))
        return out
    return []


def convex_test_functions(space, rng: np.random.Generator, count: int = 3, scale: float = 1.0):
    """(label, F) pairs of convex functions: d(., p), d(., p)^2 and horofunctions."""
    out = []
    for k in range(count):
        p = space.random_point(rng, scale)
        out.append((f"distance_{k}", lambda x, p=p: space.distance(x, p)))
        out.append((f"squared_distance_{k}", lambda x, p=p: space.distance(x, p) ** 2))
    for k, xi in enumerate(boundary_directions(space, rng, count)):
        out.append((f"horofunction_{k}", xi.horofunction))
    return out


def subharmonic_suite(result: MinimizeResult, mu: FiniteSupportMeasure, sample, functions=None,
                      seed: int = 0, tol: float = 1e-9) -> dict:
    """Delta_mu (F o f) <= tol for convex F and the converged harmonic map f of ``result``."""
    if result.status != CONVERGED:
        raise DomainError(f"subharmonicity needs a converged harmonic map, got {result.status!r}")
    f = result.map
    if functions is None:
        functions = convex_test_functions(f.action.space, np.random.default_rng(seed))
    sample = list(sample)
    return {label: check_mu_subharmonic(pullback(f, F), mu, sample, tol) for label, F in functions}
