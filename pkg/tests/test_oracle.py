import numpy as np
import pytest

from mcqw.oracle import MAX_COINS, evolve, oracle_distribution, sample_case_b
from mcqw.walk import InitialSpec, Pure


def test_norm_is_preserved():
    psi = evolve(3, 9, InitialSpec.case_a(3))
    assert psi.shape == (19, 8)
    assert np.sum(np.abs(psi) ** 2) == pytest.approx(1.0, abs=1e-13)


def test_hadamard_walk_by_hand():
    # one coin, start |1> at 0: (1,0) -> after H and shift: right with 1/sqrt2
    # in chirality +1, left with 1/sqrt2 in chirality -1
    d1 = oracle_distribution(1, 1, InitialSpec.ket1(1))
    assert d1.as_dict() == pytest.approx({-1: 0.5, 1: 0.5})
    d3 = oracle_distribution(1, 3, InitialSpec.ket1(1))
    assert d3.as_dict() == pytest.approx({-3: 0.125, -1: 0.125, 1: 0.625, 3: 0.125})
    d2 = oracle_distribution(1, 2, InitialSpec.case_a(1))
    assert d2.as_dict() == pytest.approx({-2: 0.25, 0: 0.5, 2: 0.25})


def test_coins_are_used_cyclically():
    # coin 1 starts in |1> and is never flipped before step 2
    init = InitialSpec((Pure.of([1, 0]), Pure.of([0, 1])))
    d = oracle_distribution(2, 1, init)
    assert d.as_dict() == pytest.approx({-1: 0.5, 1: 0.5})


def test_mixed_average_is_symmetric():
    d = oracle_distribution(3, 12, InitialSpec.case_b(3))
    assert np.allclose(d.mass, d.mass[::-1], atol=1e-14)


def test_sampler_enumerates_when_cheap():
    a = sample_case_b(3, 7, 100, seed=1)
    b = oracle_distribution(3, 7, InitialSpec.case_b(3))
    assert a.tv(b) < 1e-14


def test_sampler_is_reproducible():
    a = sample_case_b(10, 12, 50, seed=7)
    b = sample_case_b(10, 12, 50, seed=7)
    assert np.array_equal(a.mass, b.mass)
    exact = oracle_distribution(10, 12, InitialSpec.case_b(10))
    assert a.tv(exact) < 0.2


def test_size_limits():
    with pytest.raises(ValueError):
        oracle_distribution(MAX_COINS + 1, 3, InitialSpec.case_a(MAX_COINS + 1))
    with pytest.raises(ValueError):
        oracle_distribution(2, 100, InitialSpec.case_a(2))
    with pytest.raises(ValueError):
        evolve(2, 3, InitialSpec.case_b(2))
    with pytest.raises(ValueError):
        sample_case_b(2, 3, 0, seed=0)
