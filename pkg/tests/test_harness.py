import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcqw import harness as H
from mcqw import laws as L
from mcqw.walk import DEFAULT_BUDGET, PositionDistribution, binomial_distribution, distribution_cost


def point_mass(t=0):
    m = np.zeros(2 * t + 1)
    m[t] = 1.0
    return PositionDistribution(t, m)


def test_ks_examples():
    assert H.ks_distance(point_mass(), 1.0, L.Dirac0()) == 0.0
    assert H.ks_distance(point_mass(4), 1.0, L.Dirac0()) == 0.0
    assert H.ks_distance(binomial_distribution(1000), 0.5, L.Gaussian()) < 0.02
    two = PositionDistribution(1, np.array([0.5, 0.0, 0.5]))
    assert H.ks_distance(two, 1.0, L.Dirac0()) == pytest.approx(0.5)


def test_ks_sees_atom_from_both_sides():
    # continuous law vs a distribution that puts 0.3 on the origin
    m = np.zeros(201)
    m[::2] = 0.7 / 101
    m[100] += 0.3
    d = PositionDistribution(100, m)
    assert H.ks_distance(d, 1.0, L.Arcsine(0.0)) >= 0.15
    # and vice versa: a law with an atom against an atomless grid (odd t)
    odd = binomial_distribution(101)
    assert H.ks_distance(odd, 0.5, L.FixedMB(2)) >= 0.25 - 1e-12


@given(st.integers(1, 300))
def test_ks_in_unit_interval(t):
    v = H.ks_distance(binomial_distribution(t), 0.5, L.Gaussian())
    assert 0.0 <= v <= 1.0


def test_ks_between_laws():
    assert H.ks_between_laws(L.Konno(), L.Konno()) == 0.0
    assert H.ks_between_laws(L.FixedDB(2), L.Gaussian()) < 1e-8
    assert H.ks_between_laws(L.Dirac0(), L.Arcsine(1.0)) == pytest.approx(0.5, abs=1e-12)


def test_critical_exponents():
    assert H.critical_exponent("a", 0.2) == 0.5
    assert H.critical_exponent("b", 0.8) == 0.8
    assert H.critical_exponent("c", 0.5) == 0.75
    with pytest.raises(ValueError):
        H.critical_exponent("z", 0.5)


@pytest.mark.parametrize(
    "assumption,beta,name",
    [
        ("a", 0.3, "gaussian"),
        ("a", 0.5, "gauss+arcsine:beta=0.0"),
        ("a", 0.7, "arcsine:beta=0.0"),
        ("a", 1.0, "arcsine:beta=1.0"),
        ("b", 0.2, "gaussian"),
        ("b", 0.5, "gauss+arcsine:beta=0.5"),
        ("b", 0.8, "arcsine:beta=0.8"),
        ("c", 0.0, "gaussian"),
        ("c", 0.5, "gauss*konno"),
        ("c", 1.0, "konno"),
    ],
)
def test_predicted_laws(assumption, beta, name):
    assert H.predicted_law(assumption, beta).name == name


def test_above_critical_is_dirac():
    assert isinstance(H.predicted_law("a", 0.3, 0.7), L.Dirac0)
    assert isinstance(H.predicted_law("c", 0.5, 0.9), L.Dirac0)
    with pytest.raises(ValueError):
        H.predicted_law("c", 0.5, 0.6)


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.8, 1.0])
def test_family_a_arithmetic(beta):
    fam = H.ScalingFamily.build("a", beta, t_max=4000)
    assert fam.times == sorted(set(fam.times))
    for p in fam.points:
        M = p.spec.M
        assert p.init.n_mixed == 0
        assert p.t == M + int(round(M**beta))


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.8])
def test_family_b_arithmetic(beta):
    for p in H.ScalingFamily.build("b", beta, t_max=4000).points:
        M = p.spec.M
        assert p.t == 2 * M
        assert p.meta["n_pure"] == int(round(M**beta))
        assert all(not hasattr(c, "vec") for c in p.init.coins[p.meta["n_pure"]:])


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.8])
def test_family_c_arithmetic(beta):
    fam = H.ScalingFamily.build("c", beta, t_max=4000)
    assert len(fam.points) >= 4
    for p in fam.points:
        M, d = p.spec.M, p.spec.d
        assert p.spec.q == 0 and M * d == p.t
        assert p.init.n_mixed == M
        # exact powers: t^((1+beta)/2) equals sqrt(M) d
        assert p.t ** ((1 + beta) / 2) == pytest.approx(math.sqrt(M) * d, rel=1e-9)


def test_family_c_prefers_odd_coin_counts():
    for p in H.ScalingFamily.build("c", 0.8, t_max=4000).points:
        assert p.spec.M % 2 == 1


def test_fit_exponent():
    t = np.array([10, 100, 1000])
    assert H.fit_exponent(t, 3 * t**0.7) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        H.fit_exponent(t, [1, 0, 1])


def test_scaling_exponent_examples():
    binom_fam = H.ScalingFamily.build("binomial", times=[200, 400, 800, 1600, 2000])
    assert H.scaling_exponent(binom_fam) == pytest.approx(0.5, abs=0.02)
    ballistic = H.ScalingFamily.build("a", 1.0, times=[200, 400, 800, 1600, 2000])
    assert H.scaling_exponent(ballistic) == pytest.approx(1.0, abs=0.03)
    c_half = H.ScalingFamily.build("c", 0.5, t_max=2000)
    assert H.scaling_exponent(c_half) == pytest.approx(0.75, abs=0.05)
    with pytest.raises(ValueError):
        H.scaling_exponent(H.ScalingFamily.build("b", 0.5, times=[100, 200]))


def test_evaluate_family_report():
    fam = H.ScalingFamily.build("b", 0.5, t_max=1000)
    rep = H.evaluate_family(fam, ceilings={})
    assert rep.law == "gauss+arcsine:beta=0.5"
    assert rep.ks_monotone and rep.exponent_ok
    # the decay threshold is sized for the full 4000-step ladder; here it is only positive
    assert rep.above_critical_decay > 0.1
    assert len(rep.csv_rows()) == len(fam.points)
    assert all(len(r) == len(H.ConvergenceReport.CSV_FIELDS) for r in rep.csv_rows())
    json.dumps(rep.to_dict())
    # second scaled moment near E[(X + W)^2] = 1 + 1/4
    assert rep.points[-1].moments[1] == pytest.approx(1.25, abs=0.02)


def test_budget_gives_partial_report():
    fam = H.ScalingFamily.build("a", 0.2, times=[100, 200, 400, 800])
    big = max(distribution_cost(p.spec, p.init) for p in fam.points)
    small = sorted(distribution_cost(p.spec, p.init) for p in fam.points)[1]
    rep = H.evaluate_family(fam, budget=small, ceilings={})
    assert not rep.complete and not rep.passed
    assert len(rep.points) == 2 and len(rep.skipped) == 2
    assert big < DEFAULT_BUDGET


def test_sweep_is_deterministic_and_job_independent():
    a = H.phase_sweep("b", [0.2, 0.8], t_max=500, ceilings={})
    b = H.phase_sweep("b", [0.2, 0.8], t_max=500, jobs=3, ceilings={})
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
    with pytest.raises(ValueError):
        H.phase_sweep("fixedM", [0.5])


def test_ceilings_file():
    ceil = H.load_ceilings()
    for a in "abc":
        for beta in (0.2, 0.5, 0.8):
            assert H.ceiling_key(a, beta) in ceil
    # explicit acceptance bounds are never looser than the golden file implies
    assert ceil["corollary:A"] <= 0.05 * 1.25
    assert ceil["balanced:phi0"] <= 0.06 * 1.25


def test_double_limit_routes_small():
    r = H.double_limit_check(ds=(2, 4, 8), Ms=(3, 7, 15), balanced_Ms=(11, 21, 41))
    assert r["fixed_d"]["monotone"] and r["fixed_m"]["monotone"]
    assert r["balanced_phi0"]["monotone"] and r["balanced_ket1"]["monotone"]
    assert r["balanced_ket1"]["law_second_moment"] == pytest.approx(1 - 5 / (4 * math.sqrt(2)))
    # baseline: Z_2 is exactly Gaussian, so its distance is KS(N, N*Z)
    assert r["fixed_d"]["ks"][0] == pytest.approx(H.ks_between_laws(L.Gaussian(), L.Scaled(L.GaussTimesKonno(), math.sqrt(2))), abs=1e-6)
