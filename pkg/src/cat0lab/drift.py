"""Drift of random walks: L^n, its running maximum, and convex combinations.

L^n = sum_g d(e, g) mu^{*n}(g) is subadditive, so L^n / n converges to its
infimum (the drift).  The running maximum Ltilde^n = max_{m <= n} L^m is
again subadditive and has the same limit, which is what makes the bound

    drift(sum_n a_n mu^{*n}) <= (1 + sum_n n a_n) drift(mu)

work: for every k,  L^k(nu) <= (1 + sum n a_n) Ltilde^k(mu).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DomainError, SchemaError
from .groups import FreeGroup, InfiniteDihedral, Lattice, ball, distance_norm
from .measures import DEFAULT_SUPPORT_BUDGET, FiniteSupportMeasure, convolution_powers
from .walkers import simulate_lengths

EXACT = "exact"
MONTE_CARLO = "monte-carlo"


@dataclass
class DriftSeries:
    """L^n and Ltilde^n for n = 0..n_max (index = n; L^0 = 0)."""

    Ln: list
    Ltilde: list
    drift_estimate: float
    n_max: int
    mode: str = EXACT
    stderr: list = field(default_factory=list)
    argmin_n: int = 1
    last_ratio: float = 0.0
    method: str = "convolution"
    samples: int | None = None
    seed: int | None = None

    @property
    def drift_stderr(self) -> float:
        if not self.stderr:
            return 0.0
        return self.stderr[self.argmin_n] / self.argmin_n

    def ratio(self, n: int):
        return self.Ln[n] / n

    def subadditivity_violations(self) -> list[tuple[int, int]]:
        """Pairs (m, n) with L^{m+n} > L^m + L^n (exact comparison in exact mode)."""
        bad = []
        for m in range(1, self.n_max + 1):
            for n in range(m, self.n_max + 1 - m):
                if self.Ln[m + n] > self.Ln[m] + self.Ln[n]:
                    bad.append((m, n))
        return bad

    def envelope_violations(self) -> list[tuple[int, int]]:
        """Pairs (i, k) with Ltilde^{ik} > i Ltilde^k."""
        bad = []
        for k in range(1, self.n_max + 1):
            for i in range(1, self.n_max // k + 1):
                if self.Ltilde[i * k] > i * self.Ltilde[k]:
                    bad.append((i, k))
        return bad

    def rows(self):
        for n in range(1, self.n_max + 1):
            se = self.stderr[n] if self.stderr else 0.0
            yield n, float(self.Ln[n]), float(self.Ltilde[n]), float(self.Ln[n]) / n, se

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "Ln", "Ltilde", "Ln_over_n", "stderr"])
            for row in self.rows():
                w.writerow([row[0]] + [repr(x) for x in row[1:]])

    def to_dict(self) -> dict:
        exact = self.mode == EXACT

        def fmt(x):
            return str(x) if exact and isinstance(x, Fraction) else float(x)

        return {
            "mode": self.mode,
            "method": self.method,
            "n_max": self.n_max,
            "Ln": [fmt(x) for x in self.Ln],
            "Ltilde": [fmt(x) for x in self.Ltilde],
            "stderr": [float(x) for x in self.stderr],
            "drift_estimate": fmt(self.drift_estimate),
            "drift_stderr": self.drift_stderr,
            "argmin_n": self.argmin_n,
            "last_ratio": fmt(self.last_ratio),
            "samples": self.samples,
            "seed": self.seed,
        }


def _finish(Ln, n_max, **kw) -> DriftSeries:
    Lt = [Ln[0]]
    for n in range(1, n_max + 1):
        Lt.append(max(Lt[-1], Ln[n]))
    ratios = [(Ln[n] / n, n) for n in range(1, n_max + 1)]
    best, argmin = min(ratios, key=lambda t: (t[0], t[1]))
    return DriftSeries(Ln=Ln, Ltilde=Lt, drift_estimate=best, n_max=n_max, argmin_n=argmin,
                       last_ratio=Ln[n_max] / n_max, **kw)


def length_chain(mu: FiniteSupportMeasure):
    """Down-step probability of the birth-death chain followed by d(e, X_n), or None.

    For mu uniform on the default generators of F_k, Z or D_inf, the word
    length of the walk is itself a Markov chain on {0, 1, 2, ...}: from 0 it
    moves to 1, from r > 0 it moves to r - 1 with probability q.
    """
    group = mu.group
    if not mu.exact:
        return None
    if isinstance(group, (FreeGroup, InfiniteDihedral)) or (isinstance(group, Lattice) and group.rank == 1):
        if mu == FiniteSupportMeasure.uniform_generators(group):
            return Fraction(1, len(group.generating_set()))
    return None


def _exact_by_chain(q: Fraction, n_max: int) -> list:
    dist = {0: Fraction(1)}
    Ln = [Fraction(0)]
    for _ in range(n_max):
        nxt: dict[int, Fraction] = {}
        for r, p in dist.items():
            if r == 0:
                nxt[1] = nxt.get(1, 0) + p
            else:
                nxt[r - 1] = nxt.get(r - 1, 0) + p * q
                nxt[r + 1] = nxt.get(r + 1, 0) + p * (1 - q)
        dist = nxt
        Ln.append(sum(r * p for r, p in dist.items()))
    return Ln


def drift_series(mu: FiniteSupportMeasure, n_max: int, *, mode: str = EXACT,
                 method: str = "auto", samples: int | None = None, seed: int | None = None,
                 length=None, budget: int = DEFAULT_SUPPORT_BUDGET) -> DriftSeries:
    """L^n, Ltilde^n and the drift estimate min_{n <= n_max} L^n / n.

    ``mode="exact"`` convolves exactly (rationals when mu is rational); for
    the birth-death cases of :func:`length_chain` ``method="auto"`` uses the
    lumped chain instead of the full convolution.  ``mode="monte-carlo"``
    averages ``samples`` simulated walks and reports per-n standard errors.
    ``length`` overrides the word metric (default: the group's word length
    for its default generating set).
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    length = length or distance_norm
    if mode == EXACT:
        q = length_chain(mu) if length is distance_norm else None
        if method == "chain" and q is None:
            raise DomainError("no lumped length chain for this measure")
        if q is not None and method in ("auto", "chain"):
            Ln = _exact_by_chain(q, n_max)
            used = "length-chain"
        else:
            zero = Fraction(0) if mu.exact else 0.0
            Ln = [zero]
            for _, m in convolution_powers(mu, n_max, budget):
                Ln.append(sum((length(g) * w for g, w in m.weights.items()), zero))
            used = "convolution"
        return _finish(Ln, n_max, mode=EXACT, method=used,
                       stderr=[0.0] * (n_max + 1))
    if mode != MONTE_CARLO:
        raise DomainError(f"unknown drift mode {mode!r}")
    if not samples or samples < 2 or seed is None:
        raise DomainError("monte-carlo mode needs samples >= 2 and a seed")
    if length is not distance_norm:
        raise DomainError("monte-carlo mode supports the default word metric only")
    s1, s2 = simulate_lengths(mu, n_max, samples, seed)
    mean = s1 / samples
    var = np.maximum(s2 / samples - mean * mean, 0.0) * samples / (samples - 1)
    se = np.sqrt(var / samples)
    return _finish([float(x) for x in mean], n_max, mode=MONTE_CARLO, method="simulation",
                   stderr=[float(x) for x in se], samples=samples, seed=seed)


# -- convex combinations ----------------------------------------------------------

@dataclass
class ConvexCombinationSpec:
    """Coefficients a_1, a_2, ... (list index 0 holds a_1)."""

    coefficients: list
    truncation: int | None = None
    renormalize: bool = False

    def __post_init__(self):
        coeffs = list(self.coefficients)
        if not coeffs:
            raise SchemaError("convex combination needs at least one coefficient")
        exact = all(isinstance(a, (Rational, int, str)) for a in coeffs)
        coeffs = [Fraction(a) if exact else float(a) for a in coeffs]
        if any(a < 0 for a in coeffs):
            raise SchemaError("coefficients must be nonnegative")
        if self.truncation is not None:
            if self.truncation < 1:
                raise SchemaError("truncation must be >= 1")
            coeffs = coeffs[: self.truncation]
        self.original_mass = sum(coeffs)
        if self.original_mass == 0:
            raise SchemaError("coefficients sum to zero")
        ok = self.original_mass == 1 if exact else math.isclose(self.original_mass, 1.0, abs_tol=1e-12)
        self.renormalized = False
        if not ok:
            if not self.renormalize:
                raise SchemaError(f"coefficients sum to {self.original_mass}, not 1 "
                                  "(set renormalize to rescale the truncated sequence)")
            coeffs = [a / self.original_mass for a in coeffs]
            self.renormalized = True
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients = coeffs
        self.exact = exact
        self.N = len(coeffs)

    @classmethod
    def geometric(cls, ratio=Fraction(1, 2), N: int = 6) -> "ConvexCombinationSpec":
        """a_n proportional to ratio^n for n <= N, renormalized."""
        ratio = Fraction(ratio)
        return cls([ratio ** n for n in range(1, N + 1)], truncation=N, renormalize=True)

    @property
    def first_moment(self):
        return sum(n * a for n, a in enumerate(self.coefficients, start=1))

    @property
    def factor(self):
        return 1 + self.first_moment


def build_convex_combination(mu: FiniteSupportMeasure, spec: ConvexCombinationSpec,
                             budget: int = DEFAULT_SUPPORT_BUDGET) -> FiniteSupportMeasure:
    """nu = sum_{n <= N} a_n mu^{*n} (renormalized when the spec says so).

    The result carries ``nu.provenance`` with the truncation level, the
    renormalization, the second moment sum d(e,g)^2 nu(g) and whether the
    support covers ball(N) minus the identity.
    """
    if not mu.is_symmetric():
        raise DomainError("convex combinations are built from a symmetric measure")
    weights: dict = {}
    for n, m in convolution_powers(mu, spec.N, budget):
        a = spec.coefficients[n - 1]
        if a == 0:
            continue
        for g, w in m.weights.items():
            weights[g] = weights.get(g, 0) + a * w
    exact = mu.exact and spec.exact
    if not exact:
        total = sum(weights.values())
        weights = {g: float(w) / float(total) for g, w in weights.items()}
    nu = FiniteSupportMeasure(mu.group, weights, symmetric=True, exact=exact)
    B = ball(mu.group, spec.N)
    missing = [g for g in B.elements if not g.is_identity() and g not in nu.weights]
    nu.provenance = {
        "truncation": spec.N,
        "renormalized": spec.renormalized,
        "original_mass": str(spec.original_mass) if spec.exact else float(spec.original_mass),
        "first_moment": spec.first_moment,
        "second_moment": nu.moment(distance_norm, 2),
        "covers_ball_minus_identity": not missing,
        "ball_radius": spec.N,
        "missing_count": len(missing),
    }
    return nu


@dataclass
class ConvCombReport:
    lhs: float
    rhs: float
    factor: object
    holds: bool
    mode: str
    lhs_stderr: float = 0.0
    rhs_stderr: float = 0.0
    margin: float = 0.0
    finite_k_holds: bool | None = None
    finite_k_violations: list = field(default_factory=list)
    mu_series: DriftSeries | None = None
    nu_series: DriftSeries | None = None
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lhs": float(self.lhs), "rhs": float(self.rhs), "factor": str(self.factor),
            "holds": self.holds, "mode": self.mode, "lhs_stderr": self.lhs_stderr,
            "rhs_stderr": self.rhs_stderr, "margin": self.margin,
            "finite_k_holds": self.finite_k_holds,
            "finite_k_violations": self.finite_k_violations,
            "provenance": {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.provenance.items()},
        }


def verify_conv_comb_bound(mu: FiniteSupportMeasure, spec: ConvexCombinationSpec, n_max: int, *,
                           mode: str = EXACT, samples: int | None = None, seed: int | None = None,
                           n_sigma: float = 3.0) -> ConvCombReport:
    """Compare drift(nu) with (1 + sum n a_n) drift(mu) for nu = sum a_n mu^{*n}.

    In exact mode the finite-k form L^k(nu) <= factor * Ltilde^k(mu) is also
    checked for every k <= n_max.  In Monte Carlo mode ``holds`` allows
    ``n_sigma`` combined standard errors.
    """
    nu = build_convex_combination(mu, spec)
    factor = spec.factor
    if mode == MONTE_CARLO:
        if seed is None:
            raise DomainError("monte-carlo mode needs a seed")
        seed_mu, seed_nu = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(2))
        s_mu = drift_series(mu, n_max, mode=mode, samples=samples, seed=seed_mu)
        s_nu = drift_series(nu, n_max, mode=mode, samples=samples, seed=seed_nu)
    else:
        s_mu = drift_series(mu, n_max)
        s_nu = drift_series(nu, n_max)
    lhs = s_nu.drift_estimate
    rhs = factor * s_mu.drift_estimate
    se_l = s_nu.drift_stderr
    se_r = float(factor) * s_mu.drift_stderr
    margin = n_sigma * math.hypot(se_l, se_r)
    report = ConvCombReport(lhs=lhs, rhs=rhs, factor=factor, holds=bool(lhs <= rhs + margin),
                            mode=mode, lhs_stderr=se_l, rhs_stderr=se_r, margin=margin,
                            mu_series=s_mu, nu_series=s_nu, provenance=dict(nu.provenance))
    if mode == EXACT:
        bad = [k for k in range(1, n_max + 1) if s_nu.Ln[k] > factor * s_mu.Ltilde[k]]
        report.finite_k_holds = not bad
        report.finite_k_violations = bad
    return report
