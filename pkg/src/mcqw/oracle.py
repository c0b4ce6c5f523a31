"""
Brute-force reference walk on the full ``2**M``-dimensional coin register.

Only meant for small instances; it exists to check :mod:`mcqw.walk`.
Coin ``j`` occupies bit ``j`` of the register index (bit value 0 is
chirality +1, bit value 1 is chirality -1).
"""

from __future__ import annotations

import itertools

import numpy as np
from numpy.typing import NDArray

from .coin import HADAMARD, KET_DOWN, KET_UP
from .walk import InitialSpec, MixedBasis, PositionDistribution, Pure

__all__ = ["MAX_COINS", "MAX_STEPS", "evolve", "oracle_distribution", "sample_case_b"]

MAX_COINS = 12
MAX_STEPS = 24
# cap on (# basis assignments) * (positions) * (register size) held at once
_BATCH_ENTRIES = 1 << 23


def _check_size(M: int, t: int) -> None:
    if not 1 <= M <= MAX_COINS:
        raise ValueError(f"oracle supports 1 <= M <= {MAX_COINS}, got {M}")
    if not 0 <= t <= MAX_STEPS:
        raise ValueError(f"oracle supports 0 <= t <= {MAX_STEPS}, got {t}")


def _product_state(vectors: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Batched ``kron(phi_{M-1}, ..., phi_0)``; ``vectors`` has shape (B, M, 2)."""
    B, M, _ = vectors.shape
    state = np.ones((B, 1), dtype=np.complex128)
    for j in range(M):
        # coin j becomes the next-more-significant bit
        state = (vectors[:, j, :, None] * state[:, None, :]).reshape(B, -1)
    return state


def _evolve_batch(M: int, t: int, coins: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Evolve a batch of product states; returns amplitudes of shape (B, 2t+1, 2**M)."""
    B = coins.shape[0]
    psi = np.zeros((B, 2 * t + 1, 1 << M), dtype=np.complex128)
    psi[:, t, :] = _product_state(coins)
    for s in range(t):
        j = s % M
        view = psi.reshape(B, 2 * t + 1, 1 << (M - 1 - j), 2, 1 << j)
        flipped = np.einsum("ab,npxby->npxay", HADAMARD, view)
        out = np.zeros_like(flipped)
        out[:, 1:, :, 0, :] = flipped[:, :-1, :, 0, :]
        out[:, :-1, :, 1, :] = flipped[:, 1:, :, 1, :]
        psi = out.reshape(B, 2 * t + 1, 1 << M)
    return psi


def evolve(M: int, t: int, init: InitialSpec) -> NDArray[np.complex128]:
    """
    Full coin-register amplitudes after ``t`` steps.

    Returns an array of shape ``(2t+1, 2**M)``; row ``i`` holds position
    ``x = i - t``.
    """
    _check_size(M, t)
    if init.M != M:
        raise ValueError("init and M disagree")
    if init.n_mixed:
        raise ValueError("evolve needs an all-Pure init; use oracle_distribution for mixtures")
    coins = np.array([c.array for c in init.coins])[None]
    return _evolve_batch(M, t, coins)[0]


def _assignment_vectors(init: InitialSpec, bits: NDArray[np.int8]) -> NDArray[np.complex128]:
    """Coin vectors for each row of ``bits`` (one bit per MixedBasis coin)."""
    B = bits.shape[0]
    vecs = np.empty((B, init.M, 2), dtype=np.complex128)
    col = 0
    for j, c in enumerate(init.coins):
        if isinstance(c, Pure):
            vecs[:, j] = c.array
        else:
            vecs[:, j] = np.where(bits[:, col, None] == 0, KET_UP, KET_DOWN)
            col += 1
    return vecs


def _averaged_mass(M: int, t: int, init: InitialSpec, bits: NDArray[np.int8]) -> NDArray[np.float64]:
    per = max(1, _BATCH_ENTRIES // ((2 * t + 1) << M))
    total = np.zeros(2 * t + 1)
    for lo in range(0, bits.shape[0], per):
        psi = _evolve_batch(M, t, _assignment_vectors(init, bits[lo : lo + per]))
        total += (np.abs(psi) ** 2).sum(axis=(0, 2))
    return total / bits.shape[0]


def oracle_distribution(M: int, t: int, init: InitialSpec) -> PositionDistribution:
    """Exact law of ``X_t``; MixedBasis coins are averaged over all basis assignments."""
    _check_size(M, t)
    if init.M != M:
        raise ValueError("init and M disagree")
    m = init.n_mixed
    if m > MAX_COINS:
        raise ValueError("too many mixed coins to enumerate")
    bits = np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.int8).reshape(1 << m, m)
    return PositionDistribution(t, _averaged_mass(M, t, init, bits))


def sample_case_b(M: int, t: int, n_samples: int, seed: int) -> PositionDistribution:
    """
    Monte-Carlo estimate of the all-MixedBasis law.

    Draws ``n_samples`` basis assignments i.i.d. When ``2**M <= n_samples``
    the mixture is enumerated exactly instead.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    _check_size(M, t)
    init = InitialSpec.case_b(M)
    if (1 << M) <= n_samples:
        return oracle_distribution(M, t, init)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(n_samples, M), dtype=np.int8)
    return PositionDistribution(t, _averaged_mass(M, t, init, bits))
