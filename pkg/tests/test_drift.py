import csv
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cat0lab import (ConvexCombinationSpec, FiniteSupportMeasure, FreeGroup, InfiniteDihedral,
                     Lattice, build_convex_combination, convolution_power, convolve, drift_series,
                     sample_walk, verify_conv_comb_bound)
from cat0lab.errors import DomainError, ResourceError, SchemaError
from cat0lab.groups import distance_norm
from oracles import path_oracle_Z


def uniform(group):
    return FiniteSupportMeasure.uniform_generators(group)


def test_simple_walk_on_Z_against_path_oracle():
    s = drift_series(uniform(Lattice(1)), 10)
    assert s.Ln[1:] == [path_oracle_Z(n) for n in range(1, 11)]
    assert (s.Ln[1], s.Ln[2], s.Ln[4]) == (1, 1, Fraction(3, 2))
    assert all(isinstance(x, Fraction) for x in s.Ln)


@pytest.mark.parametrize("group,n_max", [(Lattice(1), 8), (FreeGroup(2), 6), (FreeGroup(3), 5),
                                         (InfiniteDihedral(), 8)], ids=repr)
def test_length_chain_agrees_with_convolution(group, n_max):
    mu = uniform(group)
    chain = drift_series(mu, n_max, method="chain")
    conv = drift_series(mu, n_max, method="convolution")
    assert chain.method == "length-chain" and conv.method == "convolution"
    assert chain.Ln == conv.Ln


def test_free_group_chain_approaches_birth_death_speed():
    for k in (2, 3):
        s = drift_series(uniform(FreeGroup(k)), 400)
        assert abs(float(s.Ln[400]) / 400 - (k - 1) / k) < 5e-3


def test_convolution_identities():
    mu = uniform(FreeGroup(2))
    assert convolve(convolve(mu, mu), mu) == convolve(mu, convolve(mu, mu))
    assert convolution_power(mu, 3) == convolve(convolve(mu, mu), mu)
    assert convolution_power(mu, 4).total_mass() == 1
    assert convolution_power(mu, 4).is_symmetric()
    with pytest.raises(ResourceError):
        convolution_power(mu, 100, cap=64)
    with pytest.raises(ResourceError):
        convolve(convolution_power(mu, 4), mu, budget=10)


def test_float_measures_are_renormalized_and_use_tolerance():
    Z = Lattice(1)
    s, = Z.basic_generators()
    mu = FiniteSupportMeasure(Z, {s: 0.3, s.inverse(): 0.7})
    assert not mu.exact
    m3 = convolution_power(mu, 3)
    assert abs(float(m3.total_mass()) - 1.0) < 1e-12
    with pytest.raises(DomainError):
        FiniteSupportMeasure(Z, {s: 0.3, s.inverse(): 0.6})
    with pytest.raises(DomainError):
        FiniteSupportMeasure(Z, {s: Fraction(1, 3), s.inverse(): Fraction(1, 2)})
    with pytest.raises(DomainError):
        FiniteSupportMeasure(Z, {s: Fraction(3, 2), s.inverse(): Fraction(-1, 2)})


def test_measure_descriptor():
    F = FreeGroup(2)
    mu = FiniteSupportMeasure.from_descriptor(F, {"support": ["a", "A", "b", "B"],
                                                  "weights": ["1/8", "1/8", "3/8", "3/8"],
                                                  "symmetric": True})
    assert mu.exact and mu.is_symmetric()
    assert FiniteSupportMeasure.from_descriptor(F, mu.to_descriptor()) == mu
    with pytest.raises(SchemaError):
        FiniteSupportMeasure.from_descriptor(F, {"support": ["a", "b"], "weights": ["1/2", "1/2"],
                                                 "symmetric": True})


@pytest.mark.parametrize("group", [Lattice(1), FreeGroup(2), InfiniteDihedral(), Lattice(2)], ids=repr)
def test_subadditivity_and_envelope_exact(group):
    s = drift_series(uniform(group), 10 if group.kind != "lattice" or group.rank == 1 else 8)
    assert s.subadditivity_violations() == []
    assert s.envelope_violations() == []
    assert s.drift_estimate == min(s.Ln[n] / n for n in range(1, s.n_max + 1))


def test_non_uniform_measure_goes_through_convolution():
    F = FreeGroup(2)
    a, b = F.basic_generators()
    mu = FiniteSupportMeasure(F, {a: Fraction(1, 3), a.inverse(): Fraction(1, 3),
                                  b: Fraction(1, 6), b.inverse(): Fraction(1, 6)}, symmetric=True)
    s = drift_series(mu, 6)
    assert s.method == "convolution"
    assert s.subadditivity_violations() == []
    with pytest.raises(DomainError):
        drift_series(mu, 6, method="chain")


def test_monte_carlo_is_reproducible_and_consistent():
    mu = uniform(FreeGroup(2))
    a = drift_series(mu, 60, mode="monte-carlo", samples=4000, seed=11)
    b = drift_series(mu, 60, mode="monte-carlo", samples=4000, seed=11)
    assert a.Ln == b.Ln and a.stderr == b.stderr
    exact = drift_series(mu, 60)
    for n in (1, 10, 60):
        assert abs(a.Ln[n] - float(exact.Ln[n])) <= 5 * a.stderr[n] + 1e-12
    with pytest.raises(DomainError):
        drift_series(mu, 10, mode="monte-carlo", samples=100, seed=None)


def test_sample_walk_lengths_follow_word_metric():
    mu = uniform(FreeGroup(2))
    w = sample_walk(mu, 50, seed=3)
    assert len(w.trajectory) == 51 and w.trajectory[0].is_identity()
    for x, y in zip(w.trajectory, w.trajectory[1:]):
        assert abs(distance_norm(x) - distance_norm(y)) == 1
    assert [distance_norm(g) for g in sample_walk(mu, 50, seed=3).trajectory] == \
        [distance_norm(g) for g in w.trajectory]


def test_csv_columns(tmp_path):
    s = drift_series(uniform(Lattice(1)), 5)
    s.write_csv(tmp_path / "d.csv")
    rows = list(csv.reader(open(tmp_path / "d.csv")))
    assert rows[0] == ["n", "Ln", "Ltilde", "Ln_over_n", "stderr"]
    assert [int(r[0]) for r in rows[1:]] == [1, 2, 3, 4, 5]
    assert float(rows[4][1]) == 1.5 and float(rows[4][3]) == 0.375


# -- convex combinations ---------------------------------------------------------------

def test_convex_combination_spec_validation():
    spec = ConvexCombinationSpec(["1/2", "1/2"])
    assert spec.factor == Fraction(5, 2) and spec.N == 2 and not spec.renormalized
    with pytest.raises(SchemaError):
        ConvexCombinationSpec(["1/2", "1/4"])
    with pytest.raises(SchemaError):
        ConvexCombinationSpec(["-1/2", "3/2"])
    trunc = ConvexCombinationSpec(["1/2", "1/4", "1/8", "1/8"], truncation=2, renormalize=True)
    assert trunc.renormalized and trunc.original_mass == Fraction(3, 4)
    assert trunc.coefficients == [Fraction(2, 3), Fraction(1, 3)]
    geo = ConvexCombinationSpec.geometric(Fraction(1, 2), N=5)
    assert sum(geo.coefficients) == 1


def test_convex_combination_measure():
    mu = uniform(FreeGroup(2))
    nu = build_convex_combination(mu, ConvexCombinationSpec(["1/2", "1/2"]))
    expected = convolve(mu, mu)
    for g, w in mu.weights.items():
        assert nu[g] == w / 2
    assert nu[FreeGroup(2).identity()] == expected[FreeGroup(2).identity()] / 2
    assert nu.total_mass() == 1 and nu.is_symmetric()
    assert nu.provenance["truncation"] == 2
    assert nu.provenance["covers_ball_minus_identity"]
    # half of E d(e, s)^2 = 1 plus half of E d(e, s s')^2 = 4 * 3/4
    assert nu.provenance["second_moment"] == 2


@pytest.mark.parametrize("group", [Lattice(1), FreeGroup(2), InfiniteDihedral()], ids=repr)
def test_conv_comb_bound_exact_finite_k(group):
    rep = verify_conv_comb_bound(uniform(group), ConvexCombinationSpec(["1/2", "1/2"]), 5)
    assert rep.holds and rep.finite_k_holds
    assert rep.finite_k_violations == []
    assert rep.factor == Fraction(5, 2)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=3).filter(any))
def test_conv_comb_bound_random_coefficients(raw):
    total = sum(raw)
    spec = ConvexCombinationSpec([Fraction(r, total) for r in raw])
    rep = verify_conv_comb_bound(uniform(Lattice(1)), spec, 4)
    assert rep.finite_k_holds
