import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcqw.coin import (
    HADAMARD,
    KET_UP,
    PHI0,
    coin_power,
    derivative_trace,
    eigensystem,
    eigenvalues,
    fourier_coin,
    group_velocity,
    konno_substitution,
    mu_d,
    nu_d,
    propagate,
    spectral_derivatives,
    spectral_weights,
)

angles = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False)


@st.composite
def qubits(draw):
    v = np.array(draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4)))
    z = v[:2] + 1j * v[2:]
    n = np.linalg.norm(z)
    if n < 1e-3:
        return PHI0
    return z / n


def brute_power(k, d):
    return np.linalg.matrix_power(fourier_coin(k), d)


def fd_state_derivative(k, d, phi, h=1e-4):
    # fourth-order central difference of Hk^d phi
    f = lambda kk: brute_power(kk, d) @ phi
    return (-f(k + 2 * h) + 8 * f(k + h) - 8 * f(k - h) + f(k - 2 * h)) / (12 * h)


@given(angles)
def test_fourier_coin_is_unitary(k):
    U = fourier_coin(k)
    assert np.allclose(U.conj().T @ U, np.eye(2), atol=1e-14)


def test_fourier_coin_at_zero_is_hadamard():
    assert np.allclose(fourier_coin(0.0), HADAMARD)


@given(angles)
def test_eigenpairs(k):
    es = eigensystem(k)
    U = fourier_coin(k)
    assert np.allclose(U @ es.v0, es.lambda0 * es.v0, atol=1e-13)
    assert np.allclose(U @ es.v1, es.lambda1 * es.v1, atol=1e-13)
    assert np.allclose(es.basis.conj().T @ es.basis, np.eye(2), atol=1e-13)


@given(angles)
def test_eigenvalues_never_meet(k):
    l0, l1 = eigenvalues(k)
    assert abs(l0 * l1 + 1) < 1e-14
    assert abs(l0 - l1) >= np.sqrt(2) - 1e-12


@given(angles, st.integers(0, 15))
def test_coin_power_matches_repeated_products(k, d):
    assert np.allclose(coin_power(k, d), brute_power(k, d), atol=1e-12)


def test_coin_power_broadcasts():
    k = np.linspace(0, 6, 7).reshape(7, 1) + np.zeros((1, 3))
    assert coin_power(k, 3).shape == (7, 3, 2, 2)
    assert propagate(k, 3, PHI0).shape == (7, 3, 2)


@given(angles)
def test_group_velocity_is_eigenphase_derivative(k):
    h = 1e-6
    l_plus, _ = eigenvalues(k + h)
    l_minus, _ = eigenvalues(k - h)
    l0, _ = eigenvalues(k)
    dlam = (l_plus - l_minus) / (2 * h)
    assert abs((1j * dlam / l0).real - group_velocity(k)) < 1e-8


def test_group_velocity_range():
    k = np.linspace(0, 2 * np.pi, 1001)
    h = group_velocity(k)
    assert np.max(np.abs(h)) == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert group_velocity(0.0) == pytest.approx(1 / np.sqrt(2))


@given(angles, qubits())
def test_spectral_weights_sum_to_one(k, phi):
    p, q = spectral_weights(k, phi)
    assert abs(p + q - 1) < 1e-12
    sd = spectral_derivatives(k, phi)
    assert abs(sd.h0 + sd.h1) == 0.0


def test_weights_follow_velocity_on_upper_half_only():
    # for phi0 the weight of branch 0 is (1 + sqrt(1 - 2h^2))/2 on (0, pi)
    # and (1 - sqrt(1 - 2h^2))/2 on (pi, 2pi)
    P = lambda x: (1 + np.sqrt(1 - 2 * x * x)) / 2
    k = np.linspace(0.01, np.pi - 0.01, 200)
    p, _ = spectral_weights(k, PHI0)
    assert np.allclose(p, P(group_velocity(k)), atol=1e-12)
    p2, q2 = spectral_weights(k + np.pi, PHI0)
    assert np.allclose(q2, P(group_velocity(k + np.pi)), atol=1e-12)


@given(angles, st.integers(1, 10), qubits())
def test_mu_d_matches_finite_differences(k, d, phi):
    psi = brute_power(k, d) @ phi
    dpsi = fd_state_derivative(k, d, phi)
    expected = (1j * np.vdot(psi, dpsi)).real / d
    assert abs(mu_d(k, d, phi) - expected) < 1e-7


@given(angles, st.integers(1, 10))
def test_nu_d_matches_finite_differences(k, d):
    h = 1e-3
    U = lambda kk: brute_power(kk, d)
    d2 = (-U(k + 2 * h) + 16 * U(k + h) - 30 * U(k) + 16 * U(k - h) - U(k - 2 * h)) / (12 * h * h)
    expected = -np.trace(np.linalg.inv(U(k)) @ d2).real / (2 * d)
    assert abs(nu_d(k, d) - expected) < 1e-6


def test_spectral_constants():
    k = np.linspace(0, 2 * np.pi, 301)
    assert np.max(np.abs(mu_d(k, 1, PHI0))) < 1e-10
    assert np.max(np.abs(mu_d(k, 2, PHI0) - np.sin(2 * k) / 2)) < 1e-10
    assert np.max(np.abs(nu_d(k, 1) - 1)) < 1e-10
    assert np.max(np.abs(nu_d(k, 2) - 1)) < 1e-10
    for d in range(1, 9):
        assert np.max(np.abs(derivative_trace(k, d))) < 1e-10


def test_nu_d_nonnegative_and_touches_zero():
    k = np.linspace(0, np.pi, 20001)
    v = nu_d(k, 4)
    assert v.min() > -1e-12
    assert v.min() < 1e-6


def test_ket1_second_moments():
    k = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    assert np.mean(mu_d(k, 2, KET_UP) ** 2) == pytest.approx(1 / 8, abs=1e-12)
    assert np.mean(mu_d(k, 3, KET_UP) ** 2) == pytest.approx(7 / 72, abs=1e-12)


def test_mu_d_large_d_is_bounded():
    k = np.linspace(0, 2 * np.pi, 1000)
    v = mu_d(k, 5000, PHI0)
    assert np.max(np.abs(v)) <= 1 / np.sqrt(2) + 1e-9


@given(st.floats(-0.7, 0.7))
def test_konno_substitution_inverts_velocity(x):
    k = konno_substitution(x)
    assert 0 <= k <= np.pi
    assert abs(group_velocity(k) - x) < 1e-12


def test_input_validation():
    with pytest.raises(ValueError):
        fourier_coin(np.nan)
    with pytest.raises(ValueError):
        spectral_weights(0.1, [1.0, 1.0])
    with pytest.raises(ValueError):
        spectral_weights(0.1, [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        coin_power(0.1, -1)
    with pytest.raises(ValueError):
        mu_d(0.1, 0, PHI0)
    with pytest.raises(ValueError):
        konno_substitution(0.8)
