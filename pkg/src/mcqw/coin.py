"""
Spectral analysis of the Fourier-space Hadamard coin.

The one-coin walk is diagonal in momentum: one step multiplies the coin
state by ``Hk(k) = diag(e^{ik}, e^{-ik}) @ H``. Everything the limit laws
need (group velocity, spectral weights, first/second derivative averages)
follows from the eigensystem of this 2x2 unitary, which is available in
closed form.

All functions accept scalar or array ``k`` and broadcast over it. Matrices
come back with shape ``k.shape + (2, 2)``.

Branch labelling
----------------
``lambda0 = -sqrt(1 - sin(k)^2/2) + i sin(k)/sqrt(2)`` and
``lambda1 = -conj(lambda0)``. The two eigenvalues never meet
(``|lambda0 - lambda1| >= sqrt(2)``), so this labelling is continuous on the
whole circle. Branch 0 is the one whose group velocity is positive at k=0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "HADAMARD",
    "SIGMA_Z",
    "PHI0",
    "KET_UP",
    "KET_DOWN",
    "FourierEigensystem",
    "SpectralDerivatives",
    "fourier_coin",
    "eigenvalues",
    "eigensystem",
    "coin_power",
    "propagate",
    "group_velocity",
    "spectral_weights",
    "spectral_derivatives",
    "mu_d",
    "nu_d",
    "derivative_trace",
    "konno_substitution",
]

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)

#: Symmetric initial qubit ``(1, i)/sqrt(2)``.
PHI0 = np.array([1.0, 1.0j], dtype=np.complex128) / np.sqrt(2.0)
#: Chirality +1 (steps right).
KET_UP = np.array([1.0, 0.0], dtype=np.complex128)
#: Chirality -1 (steps left).
KET_DOWN = np.array([0.0, 1.0], dtype=np.complex128)

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def _angle(k: ArrayLike) -> NDArray[np.float64]:
    k = np.asarray(k, dtype=np.float64)
    if not np.all(np.isfinite(k)):
        raise ValueError("k must be finite")
    return np.mod(k, 2.0 * np.pi)


def _unit(phi: ArrayLike) -> NDArray[np.complex128]:
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.shape != (2,):
        raise ValueError(f"coin state must be a 2-vector, got shape {phi.shape}")
    if abs(np.vdot(phi, phi).real - 1.0) > 1e-12:
        raise ValueError("coin state must have unit norm")
    return phi


def fourier_coin(k: ArrayLike) -> NDArray[np.complex128]:
    """Return ``diag(e^{ik}, e^{-ik}) @ H``."""
    k = _angle(k)
    out = np.empty(k.shape + (2, 2), dtype=np.complex128)
    ep, em = np.exp(1j * k), np.exp(-1j * k)
    out[..., 0, 0] = ep * _INV_SQRT2
    out[..., 0, 1] = ep * _INV_SQRT2
    out[..., 1, 0] = em * _INV_SQRT2
    out[..., 1, 1] = -em * _INV_SQRT2
    return out


def eigenvalues(k: ArrayLike) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    k = _angle(k)
    s = np.sin(k) * _INV_SQRT2
    c = np.sqrt(1.0 - s * s)
    lam0 = -c + 1j * s
    lam1 = c + 1j * s
    return lam0, lam1


@dataclass(frozen=True)
class FourierEigensystem:
    """Eigenpairs of ``Hk(k)``; ``v0``/``v1`` have shape ``k.shape + (2,)``."""

    k: NDArray[np.float64]
    lambda0: NDArray[np.complex128]
    lambda1: NDArray[np.complex128]
    v0: NDArray[np.complex128]
    v1: NDArray[np.complex128]

    @property
    def basis(self) -> NDArray[np.complex128]:
        """Unitary with the eigenvectors as columns, shape ``k.shape + (2, 2)``."""
        return np.stack([self.v0, self.v1], axis=-1)


def _eigvec(k, lam):
    a = np.exp(1j * k) * _INV_SQRT2
    v = np.stack([a, lam - a], axis=-1)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def eigensystem(k: ArrayLike) -> FourierEigensystem:
    k = _angle(k)
    lam0, lam1 = eigenvalues(k)
    return FourierEigensystem(k, lam0, lam1, _eigvec(k, lam0), _eigvec(k, lam1))


def coin_power(k: ArrayLike, d: int) -> NDArray[np.complex128]:
    """``Hk(k)**d`` from the spectral decomposition, not repeated products."""
    if d < 0:
        raise ValueError("d must be non-negative")
    es = eigensystem(k)
    p0 = es.v0[..., :, None] * es.v0.conj()[..., None, :]
    eye = np.eye(2, dtype=np.complex128)
    l0 = es.lambda0**d
    l1 = es.lambda1**d
    return l0[..., None, None] * p0 + l1[..., None, None] * (eye - p0)


def propagate(k: ArrayLike, d: int, phi: ArrayLike) -> NDArray[np.complex128]:
    """``Hk(k)**d @ phi`` for every k (shape ``k.shape + (2,)``)."""
    phi = np.asarray(phi, dtype=np.complex128)
    return coin_power(k, d) @ phi


def group_velocity(k: ArrayLike) -> NDArray[np.float64]:
    """
    h(k) = i (d lambda0/dk) / lambda0 = cos k / sqrt(1 + cos^2 k).

    Lies in [-1/sqrt(2), 1/sqrt(2)], with the bounds attained at k = 0, pi.
    """
    k = _angle(k)
    c = np.cos(k)
    return c / np.sqrt(1.0 + c * c)


def spectral_weights(k: ArrayLike, phi: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return ``(p, q)`` with ``p = |<v0, phi>|^2`` and ``q = 1 - p``.

    ``q`` is computed as ``|<v1, phi>|^2`` and agrees with ``1 - p`` to
    rounding.
    """
    phi = _unit(phi)
    es = eigensystem(k)
    p = np.abs(es.v0.conj() @ phi) ** 2
    q = np.abs(es.v1.conj() @ phi) ** 2
    return p, q


@dataclass(frozen=True)
class SpectralDerivatives:
    h0: NDArray[np.float64]
    h1: NDArray[np.float64]
    p: NDArray[np.float64]
    q: NDArray[np.float64]


def spectral_derivatives(k: ArrayLike, phi: ArrayLike) -> SpectralDerivatives:
    h = group_velocity(k)
    p, q = spectral_weights(k, phi)
    return SpectralDerivatives(h0=h, h1=-h, p=p, q=q)


def _hom2(x, y, n):
    # complete homogeneous polynomial h_n(x, y) for x != y
    return (x ** (n + 1) - y ** (n + 1)) / (x - y)


def _hom3_xxy(x, y, n):
    # h_n(x, x, y) = d/dx h_{n+1}(x, y)
    return ((n + 2) * x ** (n + 1) * (x - y) - (x ** (n + 2) - y ** (n + 2))) / (x - y) ** 2


def _derivative_blocks(k, d):
    """Eigenbasis data for d/dk of Hk^d, using dHk/dk = i sigma_z Hk."""
    es = eigensystem(k)
    V = es.basis
    lam = np.stack([es.lambda0, es.lambda1], axis=-1)
    S = np.swapaxes(V.conj(), -1, -2) @ SIGMA_Z @ V
    G = 1j * S * lam[..., None, :]  # V^H (i sigma_z Hk) V
    return V, lam, G


def _first_derivative_eig(lam, G, d):
    # (V^H dHk^d/dk V)_{jl} = G_{jl} * sum_a lam_j^a lam_l^(d-1-a)
    l0, l1 = lam[..., 0], lam[..., 1]
    D = np.empty(G.shape, dtype=np.complex128)
    D[..., 0, 0] = d * l0 ** (d - 1)
    D[..., 1, 1] = d * l1 ** (d - 1)
    off = _hom2(l0, l1, d - 1)
    D[..., 0, 1] = off
    D[..., 1, 0] = off
    return G * D


def mu_d(k: ArrayLike, d: int, phi: ArrayLike) -> NDArray[np.float64]:
    """
    ``<Psi_d(k), i dPsi_d/dk> / d`` with ``Psi_d(k) = Hk(k)**d @ phi``.

    Evaluated exactly in the eigenbasis; cost does not grow with d.
    """
    if d < 1:
        raise ValueError("mu_d requires d >= 1")
    phi = _unit(phi)
    V, lam, G = _derivative_blocks(k, d)
    E1 = _first_derivative_eig(lam, G, d)
    c = np.swapaxes(V.conj(), -1, -2) @ phi
    left = (lam**d * c).conj()
    val = 1j * np.einsum("...j,...jl,...l->...", left, E1, c) / d
    if np.max(np.abs(val.imag), initial=0.0) > 1e-10:
        raise ArithmeticError("mu_d lost reality; eigenbasis is inconsistent")
    return val.real


def nu_d(k: ArrayLike, d: int) -> NDArray[np.float64]:
    """``Tr[Hk^{-d} (i d/dk)^2 Hk^d] / (2d)``, evaluated in the eigenbasis."""
    if d < 1:
        raise ValueError("nu_d requires d >= 1")
    _, lam, G = _derivative_blocks(k, d)
    l0, l1 = lam[..., 0], lam[..., 1]
    # diagonal of V^H d^2(Hk^d)/dk^2 V; d^2 Hk/dk^2 = -Hk
    diag = -d * lam**d
    if d >= 2:
        same = d * (d - 1) / 2.0
        t00 = same * l0 ** (d - 2)
        t11 = same * l1 ** (d - 2)
        t010 = _hom3_xxy(l0, l1, d - 2)
        t101 = _hom3_xxy(l1, l0, d - 2)
        g00, g01 = G[..., 0, 0], G[..., 0, 1]
        g10, g11 = G[..., 1, 0], G[..., 1, 1]
        diag = diag + 2.0 * np.stack(
            [g00 * g00 * t00 + g01 * g10 * t010, g11 * g11 * t11 + g10 * g01 * t101],
            axis=-1,
        )
    val = -np.sum(diag / lam**d, axis=-1) / (2.0 * d)
    if np.max(np.abs(val.imag), initial=0.0) > 1e-10:
        raise ArithmeticError("nu_d lost reality")
    return val.real


def derivative_trace(k: ArrayLike, d: int) -> NDArray[np.complex128]:
    """``Tr[Hk^{-d} (i d/dk) Hk^d]``; identically zero for every d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    _, lam, G = _derivative_blocks(k, d)
    E1 = _first_derivative_eig(lam, G, d)
    return 1j * (E1[..., 0, 0] / lam[..., 0] ** d + E1[..., 1, 1] / lam[..., 1] ** d)


def konno_substitution(x: ArrayLike) -> NDArray[np.float64]:
    """Inverse of the group velocity on (0, pi): ``arccos(x / sqrt(1 - x^2))``."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(x) >= _INV_SQRT2):
        raise ValueError("konno_substitution needs |x| < 1/sqrt(2)")
    return np.arccos(x / np.sqrt(1.0 - x * x))
