import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cat0lab import FiniteSupportMeasure, Lattice, ball
from cat0lab.actions import EquivariantMap
from cat0lab.errors import DomainError
from cat0lab.examples import BUNDLED, bundled_example
from cat0lab.harmonic import (CONVERGED, ESCAPED, check_mu_harmonic, check_mu_subharmonic,
                              fixed_point_search, minimize_energy, mu_laplacian, pullback,
                              pullback_horofunction, shalom_search, subharmonic_suite)
from cat0lab.spaces import BusemannDirection, rescale

Z = Lattice(1)


def zint(k):
    return Z.element((k,))


def par_delta(z):
    return math.acosh(1 + 1 / (2 * z.imag ** 2))


# -- energy minimization -----------------------------------------------------------------

@pytest.mark.parametrize("name", BUNDLED)
def test_energy_is_nonincreasing(name):
    ex = bundled_example(name)
    res = minimize_energy(ex.action, ex.mu, ex.start, max_iter=3000)
    E = res.energies
    assert all(b <= a * (1 + 1e-12) + 1e-10 for a, b in zip(E, E[1:]))
    assert res.report.bound_holds()


def test_rotation_converges_to_origin():
    ex = bundled_example("z4_rotation_plane")
    res = minimize_energy(ex.action, ex.mu, ex.start)
    assert res.status == CONVERGED and res.iterations <= 200
    assert np.linalg.norm(res.map.basepoint) <= 1e-6
    assert res.report.energy <= 1e-12


def test_translation_is_flat_and_converged():
    ex = bundled_example("z_translation_line")
    for start in (-4.0, 0.0, 2.5):
        res = minimize_energy(ex.action, ex.mu, ex.action.space.point(start))
        assert res.status == CONVERGED
        assert res.report.energy == pytest.approx(2.25, abs=1e-12)


def test_parabolic_escapes():
    ex = bundled_example("parabolic_h2")
    res = minimize_energy(ex.action, ex.mu, ex.start)
    assert res.status == ESCAPED
    ys = [z.imag for z in res.iterates]
    assert all(b > a for a, b in zip(ys, ys[1:]))
    assert res.energies[-1] < 1e-3 * res.energies[0]


def test_product_harmonic_map_on_the_axis():
    ex = bundled_example("z_product_line_h2")
    res = minimize_energy(ex.action, ex.mu, ex.start)
    assert res.status == CONVERGED
    assert res.report.energy == pytest.approx(1.0, abs=1e-9)
    assert abs(res.map.basepoint[1] - 1j) <= 1e-6


def test_minimizer_arguments():
    ex = bundled_example("z4_rotation_plane")
    with pytest.raises(DomainError):
        minimize_energy(ex.action, ex.mu, ex.start, tol=0)
    with pytest.raises(DomainError):
        minimize_energy(ex.action, ex.mu, ex.start, theta=1.5)
    capped = minimize_energy(ex.action, ex.mu, ex.start, max_iter=3)
    assert capped.status == "iteration-capped" and capped.iterations == 3


@pytest.mark.parametrize("name", BUNDLED)
@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_scaling_invariance(name, lam):
    ex = bundled_example(name)
    base = minimize_energy(ex.action, ex.mu, ex.start, max_iter=600)
    scaled_action = ex.action.on_space(rescale(ex.action.space, lam))
    scaled = minimize_energy(scaled_action, ex.mu, ex.start, max_iter=600)
    assert scaled.status == base.status
    assert len(scaled.iterates) == len(base.iterates)
    Y = ex.action.space
    for x, y in zip(base.iterates, scaled.iterates):
        assert Y.distance(x, y) <= 1e-9
    for a, b in zip(base.energies, scaled.energies):
        assert b == pytest.approx(lam ** 2 * a, rel=1e-9, abs=1e-18)


# -- fixed points --------------------------------------------------------------------------

def test_dihedral_fixed_point():
    ex = bundled_example("dihedral3_plane")
    for start in ([0.3, 0.7], [-5.0, 2.0], [10.0, -10.0]):
        res = fixed_point_search(ex.action, ex.mu, start=ex.action.space.point(*start))
        assert res.found and np.linalg.norm(res.point) <= 1e-6


def test_star_tree_center_exact():
    ex = bundled_example("z4_star_tree")
    res = fixed_point_search(ex.action, ex.mu, start=ex.start)
    T = ex.action.space
    assert res.found and res.method == "circumcenter"
    assert T.distance(res.point, T.vertex_point(0)) == 0.0


def test_translation_failure_report():
    ex = bundled_example("z_translation_line")
    res = fixed_point_search(ex.action, ex.mu, start=ex.start)
    assert not res.found and res.point is None
    assert res.delta_inf == 1.5
    assert res.energy_inf == 2.25


def test_parabolic_and_product_have_no_fixed_point():
    ex = bundled_example("parabolic_h2")
    res = fixed_point_search(ex.action, ex.mu, start=ex.start)
    assert not res.found and res.minimizer_status == ESCAPED
    ex = bundled_example("z_product_line_h2")
    res = fixed_point_search(ex.action, ex.mu, start=ex.start)
    assert not res.found and res.delta_inf == pytest.approx(1.0, abs=1e-6)


# -- halving search ------------------------------------------------------------------------

def test_shalom_parabolic_certificates():
    ex = bundled_example("parabolic_h2")
    prev = 0.0
    for n in range(1, 9):
        res = shalom_search(ex.action, n, start=ex.start)
        assert res.status == "certificate"
        c = res.certificate
        assert c.holds() and c.label == "sampled"
        assert par_delta(c.v_n) <= c.r_n / n
        assert c.delta_at_vn == pytest.approx(par_delta(c.v_n), rel=1e-12)
        assert c.v_n.imag > prev
        prev = c.v_n.imag
        # every recorded ball sample really lies in the ball and misses the threshold
        assert c.sampled_min_delta_in_ball >= c.r_n / (2 * n)


def test_shalom_fixed_point_and_bounded_below():
    z4 = bundled_example("z4_rotation_plane")
    res = shalom_search(z4.action, 3, start=z4.start)
    assert res.status == "fixed point found"
    assert np.linalg.norm(res.point) <= 1e-6
    tr = bundled_example("z_translation_line")
    res = shalom_search(tr.action, 3, start=tr.start)
    assert res.status == "delta bounded below" and res.delta_bound == pytest.approx(1.5)


def test_shalom_budget_and_arguments():
    ex = bundled_example("parabolic_h2")
    res = shalom_search(ex.action, 8, start=ex.start, budget=50)
    assert res.status == "inconclusive" and "budget" in res.diagnostics["reason"]
    with pytest.raises(DomainError):
        shalom_search(ex.action, 0)


def test_shalom_is_deterministic():
    ex = bundled_example("parabolic_h2")
    a = shalom_search(ex.action, 5, start=ex.start, seed=3)
    b = shalom_search(ex.action, 5, start=ex.start, seed=3)
    assert a.certificate == b.certificate


# -- Laplacians ----------------------------------------------------------------------------

def test_laplacian_examples():
    mu = FiniteSupportMeasure.uniform_generators(Z)
    for k in range(-5, 6):
        g = zint(k)
        assert mu_laplacian(lambda h: 7, mu, g) == 0
        assert mu_laplacian(lambda h: h.rep[0], mu, g) == 0
        assert mu_laplacian(lambda h: h.rep[0] ** 2, mu, g) == -1
        assert isinstance(mu_laplacian(lambda h: h.rep[0] ** 2, mu, g), Fraction)


symmetric_measures = st.dictionaries(st.integers(1, 6), st.integers(1, 9), min_size=1, max_size=4)


@settings(max_examples=40, deadline=None)
@given(symmetric_measures, st.floats(0.1, 5.0))
def test_busemann_pullback_is_harmonic_for_translations(weights, t):
    from cat0lab.examples import z_translation_line
    ex = z_translation_line(t)
    total = 2 * sum(weights.values())
    mu = FiniteSupportMeasure(Z, {**{zint(k): Fraction(w, total) for k, w in weights.items()},
                                  **{zint(-k): Fraction(w, total) for k, w in weights.items()}},
                              symmetric=True)
    f = EquivariantMap(ex.action, ex.start)
    xi = BusemannDirection.euclidean(ex.action.space, [1.0])
    phi = pullback_horofunction(ex.action, f, xi)
    assert phi(Z.identity()) == 0.0
    sample = [zint(k) for k in range(-40, 41)]
    for g in sample:
        assert phi(g) == pytest.approx(-g.rep[0] * t, abs=1e-12)
    assert check_mu_harmonic(phi, mu, sample, tol=1e-12).passed


@pytest.mark.parametrize("name", ["parabolic_h2", "z_product_line_h2", "z4_rotation_plane"])
def test_pullback_is_lipschitz_along_the_orbit(name):
    ex = bundled_example(name)
    f = EquivariantMap(ex.action, ex.start)
    rng = np.random.default_rng(0)
    from cat0lab.harmonic import boundary_directions
    elems = list(ball(ex.action.group, 4).elements)
    for xi in boundary_directions(ex.action.space, rng, 2):
        phi = pullback_horofunction(ex.action, f, xi)
        for g in elems:
            for h in elems[:10]:
                assert abs(phi(g) - phi(h)) <= ex.action.space.distance(f(g), f(h)) + 1e-9


def test_subharmonic_checks():
    mu = FiniteSupportMeasure.uniform_generators(Z)
    sample = [zint(k) for k in range(-10, 11)]
    rep = check_mu_subharmonic(lambda g: 3.0, mu, sample)
    assert rep.passed and rep.max_value == 0.0
    assert check_mu_subharmonic(lambda g: float(g.rep[0] ** 2), mu, sample).passed
    assert not check_mu_subharmonic(lambda g: -float(g.rep[0] ** 2), mu, sample).passed
    # Z/4 at its harmonic (fixed) point: pullbacks of linear functions are harmonic
    ex = bundled_example("z4_rotation_plane")
    f = EquivariantMap(ex.action, ex.action.space.point(0.0, 0.0))
    xi = BusemannDirection.euclidean(ex.action.space, [0.3, -1.0])
    phi = pullback_horofunction(ex.action, f, xi)
    assert abs(mu_laplacian(phi, ex.mu, ex.action.group.identity())) <= 1e-15


@pytest.mark.parametrize("name", [n for n in BUNDLED if n != "parabolic_h2"])
def test_convex_pullbacks_at_harmonic_maps(name):
    ex = bundled_example(name)
    res = minimize_energy(ex.action, ex.mu, ex.start)
    assert res.status == CONVERGED
    sample = list(ball(ex.action.group, 6).elements)
    reports = subharmonic_suite(res, ex.mu, sample, seed=1)
    assert reports and all(r.passed for r in reports.values()), \
        {k: r.max_value for k, r in reports.items()}
    # constants pull back to harmonic functions
    f = pullback(res.map, lambda x: 0.0)
    assert check_mu_harmonic(f, ex.mu, sample).passed


def test_subharmonic_suite_rejects_escaped_runs():
    ex = bundled_example("parabolic_h2")
    res = minimize_energy(ex.action, ex.mu, ex.start)
    with pytest.raises(DomainError):
        subharmonic_suite(res, ex.mu, [Z.identity()])
