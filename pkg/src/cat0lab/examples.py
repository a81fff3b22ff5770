"""Small concrete actions used by the CLI, the tests and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .actions import AffineIsometry, IsometricAction, MobiusIsometry, ProductIsometry, TreeAutomorphism
from .errors import SchemaError
from .groups import CyclicGroup, DihedralGroup, Lattice
from .measures import FiniteSupportMeasure
from .spaces import EuclideanSpace, HyperbolicPlane, ProductSpace, star_tree


@dataclass
class Example:
    name: str
    action: IsometricAction
    mu: FiniteSupportMeasure
    start: object
    fixed_point: object = None
    note: str = ""


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def z4_rotation_plane() -> Example:
    G = CyclicGroup(4)
    E = EuclideanSpace(2)
    quarter = AffineIsometry(np.array([[0.0, -1.0], [1.0, 0.0]]), [0.0, 0.0])
    act = IsometricAction(G, E, [quarter], "Z/4 rotating the plane")
    return Example("z4_rotation_plane", act, FiniteSupportMeasure.uniform_generators(G),
                   E.point(1.0, 0.0), E.point(0.0, 0.0))


def dihedral_plane(m: int = 3) -> Example:
    G = DihedralGroup(m)
    E = EuclideanSpace(2)
    rot = AffineIsometry(_rotation(2 * math.pi / m), [0.0, 0.0])
    flip = AffineIsometry(np.diag([1.0, -1.0]), [0.0, 0.0])
    act = IsometricAction(G, E, [rot, flip], f"dihedral group of order {2 * m} on the plane")
    return Example(f"dihedral{m}_plane", act, FiniteSupportMeasure.uniform_generators(G),
                   E.point(0.3, 0.7), E.point(0.0, 0.0))


def z4_star_tree() -> Example:
    G = CyclicGroup(4)
    T = star_tree(4)
    turn = TreeAutomorphism(T, {1: 2, 2: 3, 3: 4, 4: 1})
    act = IsometricAction(G, T, [turn], "Z/4 rotating the legs of a star")
    return Example("z4_star_tree", act, FiniteSupportMeasure.uniform_generators(G),
                   T.vertex_point(1), T.vertex_point(0))


def z_translation_line(t: float = 1.5) -> Example:
    G = Lattice(1)
    E = EuclideanSpace(1)
    act = IsometricAction(G, E, [AffineIsometry([[1.0]], [t])], f"Z translating R by {t}")
    return Example("z_translation_line", act, FiniteSupportMeasure.uniform_generators(G),
                   E.point(0.0), None, note="no fixed point; displacement is |t| everywhere")


def parabolic_h2() -> Example:
    G = Lattice(1)
    H = HyperbolicPlane()
    act = IsometricAction(G, H, [MobiusIsometry(1, 1, 0, 1)], "Z acting on H2 by z -> z + 1")
    return Example("parabolic_h2", act, FiniteSupportMeasure.uniform_generators(G), 1j, None,
                   note="no fixed point; displacement tends to 0 as Im z grows")


def z_product_line_h2(t: float = 1.0, angle: float = 2 * math.pi / 5) -> Example:
    """Z acting on R x H2 by a translation times a rotation about i."""
    G = Lattice(1)
    Y = ProductSpace([EuclideanSpace(1), HyperbolicPlane()])
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    gen = ProductIsometry([AffineIsometry([[1.0]], [t]), MobiusIsometry(c, s, -s, c)])
    act = IsometricAction(G, Y, [gen], "Z on R x H2: translation and elliptic rotation")
    return Example("z_product_line_h2", act, FiniteSupportMeasure.uniform_generators(G),
                   (np.array([0.5]), complex(0.4, 2.0)), None,
                   note="harmonic maps have positive energy t^2 and sit on the line R x {i}")


BUNDLED = {
    "z4_rotation_plane": z4_rotation_plane,
    "dihedral3_plane": dihedral_plane,
    "z4_star_tree": z4_star_tree,
    "z_translation_line": z_translation_line,
    "parabolic_h2": parabolic_h2,
    "z_product_line_h2": z_product_line_h2,
}


def bundled_example(name: str, **params) -> Example:
    try:
        factory = BUNDLED[name]
    except KeyError:
        raise SchemaError(f"unknown example {name!r}; choose from {sorted(BUNDLED)}") from None
    return factory(**params)
