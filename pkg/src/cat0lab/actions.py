"""Isometric actions of groups on the model spaces, displacement and energy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SchemaError
from .groups import Group, GroupElement, ball
from .measures import FiniteSupportMeasure
from .spaces import Cat0Space, EuclideanSpace, HyperbolicPlane, MetricTree, ProductSpace, TreePoint
from .spaces.composite import RescaledSpace

ISOMETRY_TOL = 1e-9


def _base_space(space: Cat0Space) -> Cat0Space:
    while isinstance(space, RescaledSpace):
        space = space.base
    return space


# -- isometries -----------------------------------------------------------------------

class AffineIsometry:
    """x -> A x + b with A orthogonal."""

    def __init__(self, matrix, translation):
        A = np.atleast_2d(np.asarray(matrix, dtype=float))
        b = np.asarray(translation, dtype=float).reshape(-1)
        if A.shape != (b.size, b.size):
            raise SchemaError(f"matrix shape {A.shape} does not match translation of size {b.size}")
        if not np.allclose(A.T @ A, np.eye(b.size), atol=1e-12):
            raise SchemaError("affine isometry needs an orthogonal matrix")
        self.A, self.b = A, b

    def __call__(self, x):
        return self.A @ np.asarray(x, float) + self.b

    def inverse(self) -> "AffineIsometry":
        return AffineIsometry(self.A.T, -self.A.T @ self.b)

    def to_json(self):
        return {"matrix": self.A.tolist(), "translation": self.b.tolist()}


class MobiusIsometry:
    """z -> (a z + b) / (c z + d), ad - bc = 1, optionally precomposed with z -> -conj(z)."""

    def __init__(self, a, b, c, d, reflect: bool = False):
        a, b, c, d = (float(v) for v in (a, b, c, d))
        det = a * d - b * c
        if abs(det - 1.0) > 1e-12:
            raise SchemaError(f"Mobius coefficients must have ad - bc = 1, got {det}")
        self.coef = (a, b, c, d)
        self.reflect = bool(reflect)

    def __call__(self, z: complex) -> complex:
        a, b, c, d = self.coef
        if self.reflect:
            z = -z.conjugate()
        w = (a * z + b) / (c * z + d)
        return complex(w.real, abs(w.imag))

    def inverse(self) -> "MobiusIsometry":
        a, b, c, d = self.coef
        if not self.reflect:
            return MobiusIsometry(d, -b, -c, a)
        # (M o R)^-1 = R o M^-1 and R o M o R = conj-by-reflection of M
        return MobiusIsometry(d, b, c, a, reflect=True)

    def to_json(self):
        return {"coefficients": list(self.coef), "reflect": self.reflect}


class TreeAutomorphism:
    """Isometry of a metric tree induced by a permutation of its vertices."""

    def __init__(self, tree: MetricTree, perm: dict):
        self.tree = tree
        self.perm = dict(perm)
        if sorted(map(repr, self.perm)) != sorted(map(repr, self.perm.values())):
            raise SchemaError("tree permutation must be a bijection")
        for v in tree.adjacency:
            self.perm.setdefault(v, v)
        index = {}
        for i, e in enumerate(tree.edges):
            index[(e.u, e.v)] = (i, False)
            index[(e.v, e.u)] = (i, True)
        self.edge_map = []
        for e in tree.edges:
            image = (self.perm[e.u], self.perm[e.v])
            if image not in index or tree.edges[index[image][0]].length != e.length:
                raise SchemaError(f"permutation does not map edge {e.u}-{e.v} to an edge "
                                  "of the same length")
            self.edge_map.append(index[image])

    def __call__(self, p: TreePoint) -> TreePoint:
        j, flip = self.edge_map[p.edge]
        return TreePoint(j, self.tree.edges[j].length - p.offset if flip else p.offset)

    def inverse(self) -> "TreeAutomorphism":
        return TreeAutomorphism(self.tree, {w: v for v, w in self.perm.items()})

    def to_json(self):
        return {"perm": [[v, w] for v, w in self.perm.items() if v != w]}


class ProductIsometry:
    def __init__(self, parts):
        self.parts = list(parts)

    def __call__(self, x):
        return tuple(f(xi) for f, xi in zip(self.parts, x))

    def inverse(self) -> "ProductIsometry":
        return ProductIsometry([f.inverse() for f in self.parts])

    def to_json(self):
        return {"factors": [f.to_json() for f in self.parts]}


_ISOMETRY_KEYS = {EuclideanSpace: {"matrix", "translation"}, HyperbolicPlane: {"coefficients", "reflect"},
                  MetricTree: {"perm"}, ProductSpace: {"factors"}}


def isometry_from_json(space: Cat0Space, obj):
    base = _base_space(space)
    if not isinstance(obj, dict):
        raise SchemaError(f"isometry must be an object, got {obj!r}")
    allowed = next((keys for cls, keys in _ISOMETRY_KEYS.items() if isinstance(base, cls)), None)
    if allowed is None:
        raise SchemaError(f"no isometries for {base.kind}")
    extra = set(obj) - allowed
    if extra:
        raise SchemaError(f"unknown keys {sorted(extra)} in {base.kind} isometry")
    try:
        if isinstance(base, EuclideanSpace):
            return AffineIsometry(obj.get("matrix", np.eye(base.dim)),
                                  obj.get("translation", [0.0] * base.dim))
        if isinstance(base, HyperbolicPlane):
            a, b, c, d = obj["coefficients"]
            return MobiusIsometry(a, b, c, d, reflect=bool(obj.get("reflect", False)))
        if isinstance(base, MetricTree):
            labels = {str(v): v for v in base.adjacency}
            pairs = obj["perm"].items() if isinstance(obj["perm"], dict) else obj["perm"]
            perm = {labels[str(v)]: labels[str(w)] for v, w in pairs}
            return TreeAutomorphism(base, perm)
        parts = obj.get("factors")
        if not isinstance(parts, list) or len(parts) != len(base.factors):
            raise SchemaError("product isometry needs one entry per factor")
        return ProductIsometry([isometry_from_json(f, o) for f, o in zip(base.factors, parts)])
    except KeyError as exc:
        raise SchemaError(f"{base.kind} isometry: missing or unknown {exc}") from None
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{base.kind} isometry: {exc}") from None


# -- actions --------------------------------------------------------------------------

class IsometricAction:
    """rho: group -> Isom(space), given by the images of the basic generators.

    ``apply(g, x)`` spells g as a word s_1 ... s_m in the basic generators and
    their inverses and returns rho(s_1)(...rho(s_m)(x)), so it is a left
    action: apply(gh, x) = apply(g, apply(h, x)).  Whether the generator
    images satisfy the group's relations is the caller's responsibility;
    ``check_action`` tests it on samples.
    """

    def __init__(self, group: Group, space: Cat0Space, generator_images, name: str = ""):
        images = list(generator_images)
        if len(images) != len(group.basic_generators()):
            raise SchemaError(f"{group!r} has {len(group.basic_generators())} basic generators, "
                              f"got {len(images)} images")
        self.group = group
        self.space = space
        self.images = images
        self.inverses = [f.inverse() for f in images]
        self.name = name

    def on_space(self, space: Cat0Space) -> "IsometricAction":
        """The same maps viewed on a space with the same points (e.g. a rescaling)."""
        if _base_space(space).descriptor() != _base_space(self.space).descriptor():
            raise DomainError("can only move an action to a rescaling of its space")
        return IsometricAction(self.group, space, self.images, self.name)

    def apply(self, g: GroupElement, x):
        if g.group != self.group:
            raise DomainError(f"{g!r} is not an element of {self.group!r}")
        for i, e in reversed(self.group.word_of(g)):
            x = (self.images[i] if e > 0 else self.inverses[i])(x)
        return x

    def orbit(self, elements, x) -> list:
        return [self.apply(g, x) for g in elements]

    def descriptor(self) -> dict:
        return {"generators": [f.to_json() for f in self.images]}

    def __repr__(self):
        return f"IsometricAction({self.name or self.group!r} on {self.space.kind})"


@dataclass
class EquivariantMap:
    """f(g) = rho(g) f(e), determined by the basepoint f(e)."""

    action: IsometricAction
    basepoint: object

    def __call__(self, g: GroupElement):
        return self.action.apply(g, self.basepoint)


def displacement(action: IsometricAction, x, S=None) -> float:
    """delta(x) = max_{s in S} d(x, s x)."""
    S = action.group.generating_set() if S is None else S
    return max(action.space.distance(x, action.apply(s, x)) for s in S.elements)


@dataclass
class EnergyReport:
    energy: float
    basepoint: object
    lower_bound: float
    displacement: float
    min_generator_weight: float
    truncation: dict | None = None
    notes: list = field(default_factory=list)

    def bound_holds(self, tol: float = 1e-9) -> bool:
        return self.energy >= self.lower_bound - tol

    def to_dict(self, space: Cat0Space | None = None):
        return {"energy": self.energy, "lower_bound": self.lower_bound,
                "displacement": self.displacement,
                "min_generator_weight": self.min_generator_weight,
                "basepoint": space.point_to_json(self.basepoint) if space else None,
                "truncation": self.truncation, "notes": list(self.notes)}


def energy_value(action: IsometricAction, mu: FiniteSupportMeasure, x) -> float:
    d = action.space.distance
    return math.fsum(float(w) * d(x, action.apply(g, x)) ** 2 for g, w in mu.weights.items())


def energy(action: IsometricAction, mu: FiniteSupportMeasure, basepoint, S=None) -> EnergyReport:
    """E(f) = sum_g d(f(e), f(g))^2 mu(g), with the bound delta(f(e))^2 min_s mu(s)."""
    if mu.group != action.group:
        raise DomainError("measure and action live on different groups")
    S = action.group.generating_set() if S is None else S
    delta = displacement(action, basepoint, S)
    m = min(float(mu[s]) for s in S.elements)
    prov = getattr(mu, "provenance", None)
    rep = EnergyReport(energy_value(action, mu, basepoint), basepoint, delta ** 2 * m, delta, m,
                       truncation=prov)
    if prov and prov.get("renormalized"):
        rep.notes.append("measure is a truncated, renormalized combination")
    if m == 0.0:
        rep.notes.append("some generator has zero mass; the lower bound is trivial")
    return rep


def check_action(action: IsometricAction, samples: int = 1000, seed: int = 0, radius: int = 3,
                 tol: float = ISOMETRY_TOL) -> dict:
    """Sampled identity, homomorphism and isometry checks."""
    rng = np.random.default_rng(seed)
    elems = list(ball(action.group, radius).elements)
    space = action.space
    counts = {"identity": 0, "homomorphism": 0, "isometry": 0}
    e = action.group.identity()
    for _ in range(samples):
        g = elems[int(rng.integers(len(elems)))]
        h = elems[int(rng.integers(len(elems)))]
        x, y = space.random_point(rng), space.random_point(rng)
        if space.distance(action.apply(e, x), x) > tol:
            counts["identity"] += 1
        if space.distance(action.apply(g * h, x), action.apply(g, action.apply(h, x))) > tol:
            counts["homomorphism"] += 1
        if abs(space.distance(action.apply(g, x), action.apply(g, y)) - space.distance(x, y)) > tol:
            counts["isometry"] += 1
    return {"samples": samples, "violations": counts,
            "passed": not any(counts.values())}
