import json
import math

import numpy as np
import pytest

from cat0lab import FiniteSupportMeasure, FreeGroup, Lattice, ball
from cat0lab.actions import (AffineIsometry, IsometricAction, MobiusIsometry, ProductIsometry,
                             TreeAutomorphism, check_action, displacement, energy, energy_value,
                             isometry_from_json)
from cat0lab.errors import DomainError, SchemaError
from cat0lab.examples import BUNDLED, bundled_example
from cat0lab.spaces import EuclideanSpace, HyperbolicPlane, MetricTree, ProductSpace, star_tree


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_actions_are_isometric_homomorphisms(name):
    ex = bundled_example(name)
    rep = check_action(ex.action, samples=2500, seed=1)
    assert rep["passed"], rep


def test_free_group_on_hyperbolic_plane():
    # a Schottky-type pair of hyperbolic Mobius maps; any two images define an F_2 action
    F = FreeGroup(2)
    H = HyperbolicPlane()
    g1 = MobiusIsometry(2.0, 0.0, 0.0, 0.5)
    g2 = MobiusIsometry(math.cosh(1.0), math.sinh(1.0), math.sinh(1.0), math.cosh(1.0))
    act = IsometricAction(F, H, [g1, g2])
    assert check_action(act, samples=500, seed=2)["passed"]


def test_affine_isometry_validation_and_inverse():
    with pytest.raises(SchemaError):
        AffineIsometry([[2.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
    A = AffineIsometry([[0.0, -1.0], [1.0, 0.0]], [1.0, 2.0])
    x = np.array([0.3, -0.7])
    assert np.allclose(A.inverse()(A(x)), x)


def test_mobius_validation_and_reflection():
    with pytest.raises(SchemaError):
        MobiusIsometry(1.0, 1.0, 1.0, 1.0)
    R = MobiusIsometry(1.0, 0.0, 0.0, 1.0, reflect=True)  # z -> -conj(z)
    z = complex(0.4, 1.3)
    assert R(z) == pytest.approx(complex(-0.4, 1.3))
    M = MobiusIsometry(2.0, 1.0, 1.0, 1.0, reflect=True)
    assert abs(M.inverse()(M(z)) - z) < 1e-12


def test_tree_automorphism_must_preserve_edges():
    T = MetricTree([(0, 1, 1.0), (0, 2, 2.0)])
    with pytest.raises(SchemaError):
        TreeAutomorphism(T, {1: 2, 2: 1})  # legs of different length
    S = star_tree(3)
    rot = TreeAutomorphism(S, {1: 2, 2: 3, 3: 1})
    p = S.point(0, 0.25)
    assert S.distance(rot(p), S.vertex_point(0)) == pytest.approx(0.25)
    assert rot.inverse()(rot(p)) == p


def test_isometry_json_roundtrip():
    for name in BUNDLED:
        ex = bundled_example(name)
        for f in ex.action.images:
            g = isometry_from_json(ex.action.space, json.loads(json.dumps(f.to_json())))
            rng = np.random.default_rng(0)
            for _ in range(20):
                x = ex.action.space.random_point(rng)
                assert ex.action.space.distance(f(x), g(x)) <= 1e-12
    with pytest.raises(SchemaError):
        isometry_from_json(EuclideanSpace(2), {"shear": 1.0})
    with pytest.raises(SchemaError):
        isometry_from_json(HyperbolicPlane(), {"reflect": True})
    with pytest.raises(SchemaError):
        isometry_from_json(star_tree(3), {"perm": [[1, 7]]})


def test_wrong_generator_count():
    with pytest.raises(SchemaError):
        IsometricAction(FreeGroup(2), EuclideanSpace(1), [AffineIsometry([[1.0]], [1.0])])


def test_displacement_examples():
    ex = bundled_example("z_translation_line")
    rng = np.random.default_rng(4)
    for _ in range(50):
        assert displacement(ex.action, ex.action.space.random_point(rng, 10.0)) == pytest.approx(1.5)
    par = bundled_example("parabolic_h2")
    assert displacement(par.action, 1j) == pytest.approx(0.96242365011920689, abs=1e-14)
    for y in (0.3, 1.0, 7.0, 1e3):
        assert displacement(par.action, complex(0.0, y)) == pytest.approx(
            math.acosh(1 + 1 / (2 * y * y)), rel=1e-12)
    z4 = bundled_example("z4_rotation_plane")
    assert displacement(z4.action, z4.fixed_point) == 0.0


def test_energy_examples_and_lower_bound():
    ex = bundled_example("z_translation_line")
    assert energy(ex.action, ex.mu, ex.start).energy == pytest.approx(2.25)
    z4 = bundled_example("z4_rotation_plane")
    rep = energy(z4.action, z4.mu, z4.start)
    assert rep.energy == pytest.approx(2.0, abs=1e-14)
    assert rep.bound_holds()
    assert energy(z4.action, z4.mu, z4.fixed_point).energy == 0.0
    for name in BUNDLED:
        e = bundled_example(name)
        rng = np.random.default_rng(9)
        for _ in range(200):
            x = e.action.space.random_point(rng, 2.0)
            r = energy(e.action, e.mu, x)
            assert r.energy >= r.lower_bound - 1e-9
            assert r.energy == pytest.approx(energy_value(e.action, e.mu, x))


def test_energy_records_truncation():
    from cat0lab import ConvexCombinationSpec, build_convex_combination
    ex = bundled_example("z_translation_line")
    spec = ConvexCombinationSpec(["1/2", "1/4", "1/8"], renormalize=True)
    nu = build_convex_combination(ex.mu, spec)
    rep = energy(ex.action, nu, ex.start)
    assert rep.truncation["renormalized"] and rep.notes
    with pytest.raises(DomainError):
        energy(ex.action, FiniteSupportMeasure.uniform_generators(FreeGroup(2)), ex.start)


def test_product_action_is_diagonal():
    ex = bundled_example("z_product_line_h2")
    Y = ex.action.space
    assert isinstance(Y, ProductSpace)
    g, = Lattice(1).basic_generators()
    x = ex.start
    gx = ex.action.apply(g * g, x)
    assert gx[0] == pytest.approx(x[0] + 2.0)
    assert isinstance(ex.action.images[0], ProductIsometry)
    # the hyperbolic factor rotates about i, so it stays on the circle through x around i
    H = Y.factors[1]
    for h in ball(Lattice(1), 4).elements:
        assert H.distance(ex.action.apply(h, x)[1], 1j) == pytest.approx(H.distance(x[1], 1j), abs=1e-12)
