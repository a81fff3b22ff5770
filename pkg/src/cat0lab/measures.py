"""Finitely supported probability measures on groups and their convolutions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DomainError, ResourceError, SchemaError
from .groups import Group, GroupElement, sort_key

DEFAULT_SUPPORT_BUDGET = 5_000_000
FLOAT_MASS_TOL = 1e-12


def _as_weight(w, exact: bool):
    if exact:
        if isinstance(w, str):
            return Fraction(w)
        if isinstance(w, (Rational, int)):
            return Fraction(w)
        raise DomainError(f"exact measure needs rational weights, got {w!r}")
    return float(Fraction(w)) if isinstance(w, str) else float(w)


class FiniteSupportMeasure:
    """Probability measure with finite support on a group.

    Weights are exact ``Fraction`` values whenever every weight given is
    rational (ints, Fractions or "p/q" strings); otherwise floats, with the
    total mass checked to 1e-12.  The support is kept in canonical
    normal-form order so iteration is deterministic.
    """

    def __init__(self, group: Group, weights: dict, symmetric: bool = False,
                 exact: bool | None = None):
        if not weights:
            raise DomainError("measure support must be nonempty")
        if exact is None:
            exact = all(isinstance(w, (Rational, int, str)) for w in weights.values())
        merged: dict[GroupElement, object] = {}
        for g, w in weights.items():
            if g.group != group:
                raise DomainError(f"support element {g!r} not in {group!r}")
            w = _as_weight(w, exact)
            if w < 0:
                raise DomainError(f"negative weight {w} at {g!r}")
            if w == 0:
                continue
            merged[g] = merged.get(g, 0) + w
        if not merged:
            raise DomainError("measure has no positive weight")
        total = sum(merged.values())
        if exact and total != 1:
            raise DomainError(f"weights sum to {total}, not 1")
        if not exact and abs(total - 1.0) > FLOAT_MASS_TOL:
            raise DomainError(f"weights sum to {total!r}, not 1")
        self.group = group
        self.exact = exact
        self.weights = {g: merged[g] for g in sorted(merged, key=sort_key)}
        self.symmetric = False
        if symmetric:
            if not self.is_symmetric():
                raise DomainError("measure flagged symmetric but mu(g) != mu(g^-1)")
            self.symmetric = True

    # -- constructors -----------------------------------------------------------
    @classmethod
    def uniform(cls, elements, symmetric: bool | None = None) -> "FiniteSupportMeasure":
        elements = list(elements)
        group = elements[0].group
        w = Fraction(1, len(elements))
        m = cls(group, {g: w for g in elements})
        if symmetric is None:
            symmetric = m.is_symmetric()
        m.symmetric = symmetric and m.is_symmetric()
        return m

    @classmethod
    def uniform_generators(cls, group: Group) -> "FiniteSupportMeasure":
        return cls.uniform(group.generating_set().elements, symmetric=True)

    @classmethod
    def dirac(cls, g: GroupElement) -> "FiniteSupportMeasure":
        return cls(g.group, {g: Fraction(1)}, symmetric=g == g.inverse())

    @classmethod
    def from_descriptor(cls, group: Group, desc: dict) -> "FiniteSupportMeasure":
        """{"support": [...], "weights": [...], "symmetric": bool} or {"kind": "uniform_generators"}."""
        if not isinstance(desc, dict):
            raise SchemaError("measure descriptor must be an object")
        if desc.get("kind") == "uniform_generators":
            return cls.uniform_generators(group)
        support = desc.get("support")
        weights = desc.get("weights")
        if not support:
            raise SchemaError("measure descriptor has empty support")
        if weights is None:
            weights = [Fraction(1, len(support))] * len(support)
        if len(weights) != len(support):
            raise SchemaError("support and weights have different lengths")
        elems = [group.parse(s) for s in support]
        try:
            return cls(group, dict(zip(elems, weights)) if len(set(elems)) == len(elems)
                       else _accumulate(elems, weights), symmetric=bool(desc.get("symmetric", False)))
        except DomainError as exc:
            raise SchemaError(str(exc)) from None

    def to_descriptor(self) -> dict:
        return {"support": [self.group.serialize(g) for g in self.weights],
                "weights": [str(w) if self.exact else w for w in self.weights.values()],
                "symmetric": self.symmetric}

    # -- queries ------------------------------------------------------------------
    def __len__(self):
        return len(self.weights)

    def __getitem__(self, g: GroupElement):
        return self.weights.get(g, 0)

    def __iter__(self):
        return iter(self.weights.items())

    def support(self) -> list[GroupElement]:
        return list(self.weights)

    def total_mass(self):
        return sum(self.weights.values())

    def is_symmetric(self) -> bool:
        inv, key = self.group._inv, self.group._key
        by_key = {g.key: w for g, w in self.weights.items()}
        return all(by_key.get(key(inv(g.rep)), 0) == w for g, w in self.weights.items())

    @classmethod
    def _trusted(cls, group: Group, by_key: dict, reps: dict, exact: bool) -> "FiniteSupportMeasure":
        """Build from already merged, positive weights keyed by normal form.

        Skips validation; used internally by convolution where the input
        measures were validated already.
        """
        m = cls.__new__(cls)
        m.group = group
        m.exact = exact
        keys = list(by_key)
        try:
            keys.sort()
        except TypeError:
            pass
        weights = {}
        for k in keys:
            g = GroupElement(group, reps[k])
            g._key_cache.append(k)
            weights[g] = by_key[k]
        m.weights = weights
        m.symmetric = False
        return m

    def __eq__(self, other):
        if not isinstance(other, FiniteSupportMeasure):
            return NotImplemented
        return self.group == other.group and self.weights == other.weights

    def moment(self, length, p: int = 1):
        """sum length(g)^p mu(g) for a length function on the group."""
        return sum((length(g) ** p) * w for g, w in self.weights.items())

    def as_float(self) -> "FiniteSupportMeasure":
        return FiniteSupportMeasure(self.group, {g: float(w) for g, w in self.weights.items()},
                                    symmetric=self.symmetric, exact=False)

    def __repr__(self):
        items = ", ".join(f"{self.group.serialize(g)}: {w}" for g, w in list(self.weights.items())[:8])
        more = ", ..." if len(self.weights) > 8 else ""
        return f"FiniteSupportMeasure({{{items}{more}}})"


def _accumulate(elems, weights):
    out: dict = {}
    for g, w in zip(elems, weights):
        out[g] = out.get(g, 0) + (Fraction(w) if isinstance(w, str) else w)
    return out


def convolve(mu: FiniteSupportMeasure, nu: FiniteSupportMeasure,
             budget: int = DEFAULT_SUPPORT_BUDGET) -> FiniteSupportMeasure:
    """(mu * nu)(g) = sum_h mu(h) nu(h^-1 g)."""
    if mu.group != nu.group:
        raise DomainError("convolution of measures on different groups")
    group = mu.group
    mul, key = group._mul, group._key
    reps: dict = {}
    out: dict = {}
    right = [(k.rep, b) for k, b in nu.weights.items()]
    for h, a in mu.weights.items():
        hr = h.rep
        for kr, b in right:
            g = mul(hr, kr)
            gk = key(g)
            if gk in out:
                out[gk] += a * b
            else:
                out[gk] = a * b
                reps[gk] = g
                if len(out) > budget:
                    raise ResourceError(f"convolution support exceeded budget {budget}")
    exact = mu.exact and nu.exact
    if not exact:
        total = sum(out.values())
        out = {k: w / total for k, w in out.items()}
    res = FiniteSupportMeasure._trusted(group, out, reps, exact)
    res.symmetric = mu.symmetric and nu.symmetric and res.is_symmetric()
    return res


def convolution_power(mu: FiniteSupportMeasure, n: int, cap: int = 64,
                      budget: int = DEFAULT_SUPPORT_BUDGET) -> FiniteSupportMeasure:
    """mu^{*n} by repeated squaring."""
    if n < 1:
        raise DomainError("convolution power needs n >= 1")
    if n > cap:
        raise ResourceError(f"convolution power {n} exceeds cap {cap}")
    result = None
    base = mu
    while n:
        if n & 1:
            result = base if result is None else convolve(result, base, budget)
        n >>= 1
        if n:
            base = convolve(base, base, budget)
    return result


def convolution_powers(mu: FiniteSupportMeasure, n_max: int,
                       budget: int = DEFAULT_SUPPORT_BUDGET):
    """Yield (n, mu^{*n}) for n = 1..n_max by successive right convolution."""
    cur = mu
    for n in range(1, n_max + 1):
        if n > 1:
            cur = convolve(cur, mu, budget)
        yield n, cur


@dataclass
class WalkSample:
    trajectory: list
    rng_seed: int


def sample_walk(mu: FiniteSupportMeasure, length: int, seed: int) -> WalkSample:
    """Random walk X_0 = e, X_{k+1} = X_k s_{k+1} with i.i.d. increments from mu."""
    if length < 0:
        raise DomainError("walk length must be >= 0")
    rng = np.random.default_rng(seed)
    support = mu.support()
    p = np.array([float(w) for w in mu.weights.values()])
    idx = rng.choice(len(support), size=length, p=p / p.sum())
    x = mu.group.identity()
    traj = [x]
    for i in idx:
        x = x * support[i]
        traj.append(x)
    return WalkSample(traj, seed)
