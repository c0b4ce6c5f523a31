"""
Limit distributions of the multi-coin walk.

Every law exposes ``density``, ``cdf``, ``cdf_left``, ``moment`` and
``sample`` and carries its atoms explicitly. Laws are immutable; the
tables they need (spline tables, quadrature nodes) are built lazily and
cached on the instance.

The laws describe limits of the *physical* displacement ``X_t / t**theta``.
Velocities are group velocities of the Fourier coin; the spectral average
``mu_d`` defined with ``D_k = i d/dk`` has the opposite sign (``i d/dk``
acting on ``e^{ikx}`` gives ``-x``), so the fixed-d pure-state law is the
push-forward of ``-mu_d``. For the symmetric initial qubit both signs give
the same law.

Catalog names (see :func:`parse_law`)::

    dirac                  gaussian[:sigma=S]       konno
    arcsine:beta=B         gauss+arcsine:beta=B     gauss*konno
    fixedM:A:M=4[:init=phi0|ket1]                   fixedM:B:M=4
    fixedD:A:d=2[:init=phi0|ket1]                   fixedD:B:d=3
    product-sym            product-ket1

Any name may carry a trailing ``:scale=C`` to rescale the variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline
from scipy.special import comb, ndtr
from scipy.stats import binom

from .coin import KET_UP, PHI0, group_velocity, konno_substitution, mu_d, nu_d, spectral_weights

__all__ = [
    "LimitLaw",
    "Dirac0",
    "Gaussian",
    "Arcsine",
    "Konno",
    "GaussPlusArcsine",
    "GaussTimesKonno",
    "FixedMA",
    "FixedMB",
    "FixedDA",
    "FixedDB",
    "ProductLimitSym",
    "ProductLimitKet1",
    "Scaled",
    "konno_density",
    "konno_cdf",
    "density",
    "cdf",
    "moment",
    "sample",
    "fixedM_char",
    "as_printed_density_fixedM",
    "atom_mass",
    "parse_law",
    "UnknownLaw",
]

SQRT2 = math.sqrt(2.0)
_EDGE = 1.0 / SQRT2
_TWO_PI = 2.0 * math.pi


class UnknownLaw(ValueError):
    pass


def _gauss_moment(n: int) -> float:
    # E[N(0,1)^n] = (n-1)!! for even n
    return 0.0 if n % 2 else float(math.prod(range(n - 1, 0, -2)))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _g(c):
    """cos k at which the group velocity equals c (clipped to [-1, 1])."""
    c = np.asarray(c, dtype=np.float64)
    inside = np.abs(c) < _EDGE
    safe = np.where(inside, c, 0.0)
    return np.where(inside, safe / np.sqrt(1.0 - safe * safe), np.sign(c))


def konno_density(x: ArrayLike) -> NDArray[np.float64]:
    """``1 / (pi (1 - x^2) sqrt(1 - 2x^2))`` on ``|x| < 1/sqrt(2)``."""
    x = np.asarray(x, dtype=np.float64)
    inside = np.abs(x) < _EDGE
    xs = np.where(inside, x, 0.0)
    return np.where(inside, 1.0 / (np.pi * (1.0 - xs * xs) * np.sqrt(1.0 - 2.0 * xs * xs)), 0.0)


def konno_cdf(x: ArrayLike) -> NDArray[np.float64]:
    """Closed form ``1 - arccos(x / sqrt(1 - x^2)) / pi``."""
    return 1.0 - np.arccos(_g(x)) / np.pi


def _konno_abs_nodes(panels: int = 16, order: int = 24):
    """
    Nodes/weights for ``E f(|h(K)|)`` with K uniform.

    Uses ``E f(|h|) = (2/pi) int_0^{pi/2} f(h(k)) dk`` and geometric panels
    towards k = pi/2, where h vanishes and integrands like Phi(x/h) turn on
    at the scale of x.
    """
    edges = np.concatenate([[0.0], np.logspace(-15, 0, panels), [np.pi / 2]])
    gx, gw = np.polynomial.legendre.leggauss(order)
    s, w = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        s.append(0.5 * (b - a) * gx + 0.5 * (a + b))
        w.append(0.5 * (b - a) * gw)
    s = np.concatenate(s)
    w = np.concatenate(w) * (2.0 / np.pi)
    return group_velocity(np.pi / 2 - s), w


def _gauss_mix_cdf(x, sig, w, chunk=2048):
    x = np.asarray(x, dtype=np.float64)
    flat = x.reshape(-1)
    out = np.empty_like(flat)
    pos = sig > 0
    s, ws = sig[pos], w[pos]
    w0 = w[~pos].sum()
    for i in range(0, flat.size, chunk):
        xx = flat[i : i + chunk, None]
        out[i : i + chunk] = ndtr(xx / s) @ ws + w0 * (xx[:, 0] >= 0)
    return out.reshape(x.shape)


def _gauss_mix_pdf(x, sig, w, chunk=2048):
    x = np.asarray(x, dtype=np.float64)
    flat = x.reshape(-1)
    out = np.empty_like(flat)
    pos = sig > 0
    s, ws = sig[pos], w[pos] / sig[pos]
    for i in range(0, flat.size, chunk):
        z = flat[i : i + chunk, None] / s
        out[i : i + chunk] = (np.exp(-0.5 * z * z) / math.sqrt(_TWO_PI)) @ ws
    return out.reshape(x.shape)


class LimitLaw:
    """Base class; subclasses fill in the distribution-specific pieces."""

    name: str = "law"
    symmetric: bool = True

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return ()

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def density(self, x: ArrayLike) -> NDArray[np.float64]:
        raise NotImplementedError

    def cdf(self, x: ArrayLike) -> NDArray[np.float64]:
        raise NotImplementedError

    def cdf_left(self, x: ArrayLike) -> NDArray[np.float64]:
        """``P(X < x)``."""
        x = np.asarray(x, dtype=np.float64)
        out = self.cdf(x)
        for loc, m in self.atoms:
            out = out - m * (x == loc)
        return out

    def moment(self, n: int) -> float:
        raise NotImplementedError

    def sample(self, n: int, seed=None) -> NDArray[np.float64]:
        raise NotImplementedError

    def atom_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Dirac0(LimitLaw):
    name = "dirac"

    @property
    def atoms(self):
        return ((0.0, 1.0),)

    @property
    def support(self):
        return (0.0, 0.0)

    def density(self, x):
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def cdf(self, x):
        return (np.asarray(x, dtype=np.float64) >= 0).astype(np.float64)

    def moment(self, n):
        return 1.0 if n == 0 else 0.0

    def sample(self, n, seed=None):
        return np.zeros(n)


@dataclass(frozen=True)
class Gaussian(LimitLaw):
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def name(self):
        return "gaussian" if self.sigma == 1.0 else f"gaussian:sigma={self.sigma!r}"

    @property
    def support(self):
        return (-9.0 * self.sigma, 9.0 * self.sigma)

    def density(self, x):
        z = np.asarray(x, dtype=np.float64) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(_TWO_PI))

    def cdf(self, x):
        return ndtr(np.asarray(x, dtype=np.float64) / self.sigma)

    def moment(self, n):
        return self.sigma**n * _gauss_moment(n)

    def sample(self, n, seed=None):
        return self.sigma * _rng(seed).standard_normal(n)


@dataclass(frozen=True)
class Arcsine(LimitLaw):
    """Density ``2^beta s(2^beta x)``: the arcsine law on ``(-2^-beta, 2^-beta)``."""

    beta: float = 0.0

    @property
    def name(self):
        return f"arcsine:beta={self.beta!r}"

    @property
    def half_width(self) -> float:
        return 2.0 ** (-self.beta)

    @property
    def support(self):
        return (-self.half_width, self.half_width)

    def density(self, x):
        b = self.half_width
        x = np.asarray(x, dtype=np.float64)
        inside = np.abs(x) < b
        xs = np.where(inside, x, 0.0)
        return np.where(inside, 1.0 / (np.pi * np.sqrt(b * b - xs * xs)), 0.0)

    def cdf(self, x):
        u = np.clip(np.asarray(x, dtype=np.float64) / self.half_width, -1.0, 1.0)
        return 0.5 + np.arcsin(u) / np.pi

    def moment(self, n):
        if n % 2:
            return 0.0
        return self.half_width**n * math.comb(n, n // 2) / 2.0**n

    def sample(self, n, seed=None):
        return self.half_width * np.sin(_TWO_PI * _rng(seed).random(n))


@dataclass(frozen=True)
class Konno(LimitLaw):
    """Push-forward of uniform momentum under the group velocity."""

    name = "konno"

    @property
    def support(self):
        return (-_EDGE, _EDGE)

    def density(self, x):
        return konno_density(x)

    def cdf(self, x):
        return konno_cdf(x)

    def moment(self, n):
        k = np.linspace(0.0, _TWO_PI, 4096, endpoint=False)
        return float(np.mean(group_velocity(k) ** n))

    @staticmethod
    def quantile(u):
        # h(kappa) has CDF value 1 - kappa/pi for kappa in [0, pi]
        return group_velocity(np.pi * (1.0 - np.asarray(u, dtype=np.float64)))

    def sample(self, n, seed=None):
        return self.quantile(_rng(seed).random(n))


@dataclass(frozen=True)
class GaussPlusArcsine(LimitLaw):
    """Independent sum ``N(0,1) + W`` with W ~ ``Arcsine(beta)``."""

    beta: float = 0.5

    @property
    def name(self):
        return f"gauss+arcsine:beta={self.beta!r}"

    @property
    def support(self):
        b = Arcsine(self.beta).half_width
        return (-9.0 - b, 9.0 + b)

    @cached_property
    def _shifts(self):
        n = 1024
        return Arcsine(self.beta).half_width * np.sin(_TWO_PI * (np.arange(n) + 0.5) / n)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return ndtr(x[..., None] - self._shifts).mean(axis=-1)

    def density(self, x):
        z = np.asarray(x, dtype=np.float64)[..., None] - self._shifts
        return (np.exp(-0.5 * z * z) / math.sqrt(_TWO_PI)).mean(axis=-1)

    def moment(self, n):
        w = Arcsine(self.beta)
        return sum(math.comb(n, i) * _gauss_moment(i) * w.moment(n - i) for i in range(n + 1))

    def sample(self, n, seed=None):
        rng = _rng(seed)
        return rng.standard_normal(n) + Arcsine(self.beta).sample(n, rng)


@dataclass(frozen=True)
class GaussTimesKonno(LimitLaw):
    """Independent product ``N(0,1) * Z`` with Z Konno-distributed."""

    name = "gauss*konno"

    @property
    def support(self):
        return (-9.0 * _EDGE, 9.0 * _EDGE)

    @cached_property
    def _nodes(self):
        return _konno_abs_nodes()

    def cdf(self, x):
        sig, w = self._nodes
        return _gauss_mix_cdf(x, sig, w)

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        sig, w = self._nodes
        out = _gauss_mix_pdf(x, sig, w)
        return np.where(x == 0, np.inf, out)

    def moment(self, n):
        return _gauss_moment(n) * Konno().moment(n)

    def sample(self, n, seed=None):
        rng = _rng(seed)
        return rng.standard_normal(n) * Konno().sample(n, rng)


def _phi_tuple(phi) -> tuple[complex, complex]:
    v = np.asarray(phi, dtype=np.complex128)
    return (complex(v[0]), complex(v[1]))


def _init_label(phi) -> str:
    v = np.asarray(phi, dtype=np.complex128)
    if np.allclose(v, PHI0):
        return "phi0"
    if np.allclose(v, KET_UP):
        return "ket1"
    return f"({v[0]!r},{v[1]!r})"


class _FixedM(LimitLaw):
    """
    ``X_t / t`` for fixed M, ``t = d*M``, ``d -> oo``.

    Given momentum K, each coin moves with velocity ``+h(K)`` or ``-h(K)``;
    J coins take the second branch, ``J ~ Binomial(M, w(K))``, and
    ``X/t -> (1 - 2J/M) h(K)``.
    """

    M: int
    _table_cells = 2048

    def _branch_prob(self, k):
        raise NotImplementedError

    @property
    def coefficients(self) -> NDArray[np.float64]:
        return 1.0 - 2.0 * np.arange(self.M + 1) / self.M

    def _weights(self, k):
        """``C(M,j) p^j (1-p)^{M-j}`` for j = 0..M; shape (M+1,) + k.shape."""
        p = self._branch_prob(k)
        j = np.arange(self.M + 1).reshape((-1,) + (1,) * np.ndim(k))
        return binom.pmf(j, self.M, np.clip(p, 0.0, 1.0))

    def _folded(self, kappa):
        return self._weights(kappa) + self._weights(_TWO_PI - kappa)

    @property
    def support(self):
        return (-_EDGE, _EDGE)

    @cached_property
    def _tables(self):
        # S_j(alpha) = int_alpha^pi [w_j(k) + w_j(2pi - k)] dk / 2pi
        n = self._table_cells
        edges = np.linspace(0.0, np.pi, n + 1)
        gx, gw = np.polynomial.legendre.leggauss(8)
        half = 0.5 * (edges[1] - edges[0])
        mid = 0.5 * (edges[:-1] + edges[1:])
        nodes = (mid[:, None] + half * gx).ravel()
        vals = self._folded(nodes).reshape(self.M + 1, n, 8)
        cells = half * (vals @ gw) / _TWO_PI
        S = np.zeros((self.M + 1, n + 1))
        S[:, :-1] = np.cumsum(cells[:, ::-1], axis=1)[:, ::-1]
        dS = -self._folded(edges) / _TWO_PI
        return [CubicHermiteSpline(edges, S[j], dS[j]) for j in range(self.M + 1)], S[:, 0]

    @property
    def atoms(self):
        if self.M % 2:
            return ()
        return ((0.0, float(self._tables[1][self.M // 2])),)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        splines, totals = self._tables
        out = np.zeros_like(x)
        for j, a in enumerate(self.coefficients):
            if self.M == 2 * j:
                out += totals[j] * (x >= 0)
                continue
            alpha = np.arccos(_g(x / a))
            part = splines[j](alpha)
            out += part if a > 0 else totals[j] - part
        return np.clip(out, 0.0, 1.0)

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        for j, a in enumerate(self.coefficients):
            if self.M == 2 * j:
                continue
            c = x / a
            inside = np.abs(c) < _EDGE
            cs = np.where(inside, c, 0.0)
            k = konno_substitution(cs)
            w = 0.5 * (self._weights(k)[j] + self._weights(_TWO_PI - k)[j])
            out += np.where(inside, konno_density(cs) * w / abs(a), 0.0)
        return out

    def moment(self, n):
        k = np.linspace(0.0, _TWO_PI, 4096, endpoint=False)
        w = self._weights(k)
        h = group_velocity(k)
        return float(np.sum(self.coefficients**n * (w * h**n).mean(axis=1)))

    def sample(self, n, seed=None):
        rng = _rng(seed)
        k = _TWO_PI * rng.random(n)
        J = rng.binomial(self.M, np.clip(self._branch_prob(k), 0.0, 1.0))
        return (1.0 - 2.0 * J / self.M) * group_velocity(k)


@dataclass(frozen=True)
class FixedMA(_FixedM):
    M: int = 1
    phi: tuple[complex, complex] = _phi_tuple(PHI0)

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        object.__setattr__(self, "phi", _phi_tuple(self.phi))

    @property
    def symmetric(self):
        return np.allclose(self.phi, PHI0)

    @property
    def name(self):
        return f"fixedM:A:M={self.M}:init={_init_label(self.phi)}"

    def _branch_prob(self, k):
        # weight of the eigenbranch whose physical velocity is -h
        return spectral_weights(k, np.asarray(self.phi))[0]


@dataclass(frozen=True)
class FixedMB(_FixedM):
    M: int = 1

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")

    @property
    def name(self):
        return f"fixedM:B:M={self.M}"

    def _branch_prob(self, k):
        return np.full(np.shape(k), 0.5)

    def cdf(self, x):
        # constant weights: closed form via the Konno CDF
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        w = binom.pmf(np.arange(self.M + 1), self.M, 0.5)
        for j, a in enumerate(self.coefficients):
            if self.M == 2 * j:
                out += w[j] * (x >= 0)
            elif a > 0:
                out += w[j] * konno_cdf(x / a)
            else:
                out += w[j] * (1.0 - konno_cdf(x / a))
        return out

    @property
    def atoms(self):
        if self.M % 2:
            return ()
        return ((0.0, float(comb(self.M, self.M // 2, exact=True)) / 2.0**self.M),)


class _LevelSetCDF:
    """
    Law of ``f(K)`` for K uniform on the circle, from samples of f on a
    uniform periodic grid joined linearly.

    Each grid segment contributes a uniform law on ``[lo, hi]``; the sum of
    ramps is evaluated exactly with sorted cumulative sums.
    """

    def __init__(self, values: NDArray[np.float64]):
        v = np.asarray(values, dtype=np.float64)
        a, b = v, np.roll(v, -1)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        self.n = v.size
        self.range = (float(v.min()), float(v.max()))
        tiny = 1e-14 * max(1.0, float(np.abs(v).max()))
        flat = hi - lo <= tiny
        self.flat = np.sort(lo[flat])
        s = 1.0 / (hi[~flat] - lo[~flat])
        self._lo = self._prep(lo[~flat], s)
        self._hi = self._prep(hi[~flat], s)
        self.atoms = self._atoms(self.flat)

    @staticmethod
    def _prep(pts, s):
        order = np.argsort(pts)
        pts, s = pts[order], s[order]
        S = np.concatenate([[0.0], np.cumsum(s)])
        T = np.concatenate([[0.0], np.cumsum(s * pts)])
        return pts, S, T

    def _atoms(self, flat):
        if flat.size == 0:
            return ()
        vals, counts = np.unique(np.round(flat, 12), return_counts=True)
        big = counts > 1
        return tuple((float(v), c / self.n) for v, c in zip(vals[big], counts[big]))

    @staticmethod
    def _ramp_sum(x, prep):
        pts, S, T = prep
        i = np.searchsorted(pts, x, side="right")
        return x * S[i] - T[i]

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        cont = self._ramp_sum(x, self._lo) - self._ramp_sum(x, self._hi)
        steps = np.searchsorted(self.flat, x, side="right")
        out = np.clip((cont + steps) / self.n, 0.0, 1.0)
        return np.where(x >= self.range[1], 1.0, np.where(x < self.range[0], 0.0, out))


@dataclass(frozen=True)
class FixedDA(LimitLaw):
    """
    ``X_t / t`` for fixed d, pure product init, ``M -> oo``: the law of
    ``-mu_d(K)``.
    """

    d: int = 2
    phi: tuple[complex, complex] = _phi_tuple(PHI0)
    grid: int = 1 << 18

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        object.__setattr__(self, "phi", _phi_tuple(self.phi))

    @property
    def name(self):
        return f"fixedD:A:d={self.d}:init={_init_label(self.phi)}"

    @property
    def symmetric(self):
        return np.allclose(self.phi, PHI0)

    @cached_property
    def _velocity(self) -> NDArray[np.float64]:
        k = np.linspace(0.0, _TWO_PI, self.grid, endpoint=False)
        return -mu_d(k, self.d, np.asarray(self.phi))

    @cached_property
    def _levels(self) -> _LevelSetCDF:
        return _LevelSetCDF(self._velocity)

    @property
    def atoms(self):
        return self._levels.atoms

    @property
    def support(self):
        v = self._velocity
        return (float(v.min()), float(v.max()))

    def density(self, x):
        raise ValueError("fixed-d pure-state laws are evaluated through their CDF only")

    def cdf(self, x):
        return self._levels(x)

    def moment(self, n):
        return float(np.mean(self._velocity**n))

    def sample(self, n, seed=None):
        k = _TWO_PI * _rng(seed).random(n)
        return -mu_d(k, self.d, np.asarray(self.phi))


@dataclass(frozen=True)
class FixedDB(LimitLaw):
    """``X_t / sqrt(t)`` for fixed d, all-mixed init, ``M -> oo``: ``N(0, nu_d(K))``."""

    d: int = 2

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")

    @property
    def name(self):
        return f"fixedD:B:d={self.d}"

    @cached_property
    def _nodes(self):
        n = max(4096, 128 * self.d)
        k = np.pi * (np.arange(n) + 0.5) / n  # nu_d is pi-periodic
        return np.sqrt(np.clip(nu_d(k, self.d), 0.0, None)), np.full(n, 1.0 / n)

    @property
    def support(self):
        s = float(self._nodes[0].max())
        return (-9.0 * s, 9.0 * s)

    def cdf(self, x):
        return _gauss_mix_cdf(x, *self._nodes)

    def density(self, x):
        return _gauss_mix_pdf(x, *self._nodes)

    def moment(self, n):
        sig, w = self._nodes
        return _gauss_moment(n) * float(w @ sig**n)

    def sample(self, n, seed=None):
        rng = _rng(seed)
        k = np.pi * rng.random(n)
        return rng.standard_normal(n) * np.sqrt(np.clip(nu_d(k, self.d), 0.0, None))


@dataclass(frozen=True)
class ProductLimitSym(LimitLaw):
    """Density ``3 / (pi (1 + x^2) sqrt(1 - 8x^2))`` on ``|x| < 1/sqrt(8)``."""

    name = "product-sym"
    _edge = 1.0 / math.sqrt(8.0)

    @property
    def support(self):
        return (-self._edge, self._edge)

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        inside = np.abs(x) < self._edge
        xs = np.where(inside, x, 0.0)
        return np.where(inside, 3.0 / (np.pi * (1.0 + xs * xs) * np.sqrt(1.0 - 8.0 * xs * xs)), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        inside = np.abs(x) < self._edge
        xs = np.where(inside, x, 0.0)
        val = 0.5 + np.arctan(3.0 * xs / np.sqrt(1.0 - 8.0 * xs * xs)) / np.pi
        return np.where(inside, val, (x >= self._edge).astype(np.float64))

    def moment(self, n):
        # x = sin(u)/sqrt(8) removes the endpoint singularity
        c = self._edge

        def f(u):
            s = math.sin(u)
            return (c * s) ** n * 3.0 * c / (math.pi * (1.0 + (c * s) ** 2))

        val, _ = integrate.quad(f, -math.pi / 2, math.pi / 2, epsabs=1e-13, epsrel=1e-13)
        return val

    def quantile(self, u):
        T = np.tan(np.pi * (np.asarray(u, dtype=np.float64) - 0.5))
        return T / np.sqrt(9.0 + 8.0 * T * T)

    def sample(self, n, seed=None):
        return self.quantile(_rng(seed).random(n))


@dataclass(frozen=True)
class ProductLimitKet1(LimitLaw):
    """Density ``1 / (pi (1 - x) sqrt((1 - 2x) x))`` on ``(0, 1/2)``."""

    name = "product-ket1"
    symmetric = False

    @property
    def support(self):
        return (0.0, 0.5)

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        inside = (x > 0) & (x < 0.5)
        xs = np.where(inside, x, 0.25)
        return np.where(inside, 1.0 / (np.pi * (1.0 - xs) * np.sqrt((1.0 - 2.0 * xs) * xs)), 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        inside = (x > 0) & (x < 0.5)
        xs = np.where(inside, x, 0.25)
        val = (2.0 / np.pi) * np.arctan(np.sqrt(xs / (1.0 - 2.0 * xs)))
        return np.where(inside, val, (x >= 0.5).astype(np.float64))

    def moment(self, n):
        # x = sin(u)^2 / 2
        def f(u):
            x = 0.5 * math.sin(u) ** 2
            return x**n * SQRT2 / (math.pi * (1.0 - x))

        val, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-13)
        return val

    def quantile(self, u):
        T = np.tan(0.5 * np.pi * np.asarray(u, dtype=np.float64))
        return T * T / (1.0 + 2.0 * T * T)

    def sample(self, n, seed=None):
        return self.quantile(_rng(seed).random(n))


@dataclass(frozen=True)
class Scaled(LimitLaw):
    """Law of ``factor * X`` for ``X ~ base``."""

    base: LimitLaw
    factor: float

    def __post_init__(self):
        if not self.factor > 0:
            raise ValueError("scale factor must be positive")

    @property
    def name(self):
        return f"{self.base.name}:scale={self.factor!r}"

    @property
    def symmetric(self):
        return self.base.symmetric

    @property
    def atoms(self):
        return tuple((self.factor * loc, m) for loc, m in self.base.atoms)

    @property
    def support(self):
        lo, hi = self.base.support
        return (self.factor * lo, self.factor * hi)

    def density(self, x):
        return self.base.density(np.asarray(x, dtype=np.float64) / self.factor) / self.factor

    def cdf(self, x):
        return self.base.cdf(np.asarray(x, dtype=np.float64) / self.factor)

    def moment(self, n):
        return self.factor**n * self.base.moment(n)

    def sample(self, n, seed=None):
        return self.factor * self.base.sample(n, seed)


# functional front end ------------------------------------------------------


def density(law: LimitLaw, x: ArrayLike) -> NDArray[np.float64]:
    return law.density(x)


def cdf(law: LimitLaw, x: ArrayLike) -> NDArray[np.float64]:
    return law.cdf(x)


def moment(law: LimitLaw, n: int) -> float:
    if not 0 <= n <= 8:
        raise ValueError("moment order must be in 0..8")
    if n == 0:
        return 1.0
    return law.moment(n)


def sample(law: LimitLaw, n: int, seed=None) -> NDArray[np.float64]:
    if n < 1:
        raise ValueError("n must be positive")
    return law.sample(n, seed)


def _case_weights(M, phi0, case, k):
    if case == "B":
        return np.full(np.shape(k), 0.5), np.full(np.shape(k), 0.5)
    if case != "A":
        raise ValueError("case must be 'A' or 'B'")
    return spectral_weights(k, phi0)


def fixedM_char(M: int, phi0: ArrayLike, case: str, xi: ArrayLike) -> NDArray[np.complex128]:
    """
    Characteristic function of the fixed-M limit law, summed over all j:

        sum_j C(M,j) int exp(i xi (1 - 2j/M) h(k)) p(k)^{M-j} q(k)^j dk/2pi

    This is the eigenbranch convention (velocity ``h`` on branch 0); the
    physical ``X_t/t`` has the complex-conjugate characteristic function.
    """
    if M < 1:
        raise ValueError("M must be positive")
    xi = np.asarray(xi, dtype=np.float64)
    k = np.linspace(0.0, _TWO_PI, 4096, endpoint=False)
    p, q = _case_weights(M, phi0, case, k)
    h = group_velocity(k)
    out = np.zeros(xi.shape, dtype=np.complex128)
    for j in range(M + 1):
        w = comb(M, j) * p ** (M - j) * q**j
        out += np.mean(w * np.exp(1j * xi[..., None] * (1.0 - 2.0 * j / M) * h), axis=-1)
    return out


def as_printed_density_fixedM(M: int, case: str, x: ArrayLike) -> NDArray[np.float64]:
    """
    The closed-form fixed-M densities exactly as printed: the sum runs over
    ``j <= M/2`` only, with ``P(x) = (1 + sqrt(1-2x^2))/2`` and
    ``Q(x) = (1 - sqrt(1-2x^2))/2``; the ``j = M/2`` term is left to the atom.

    Kept for comparison against :func:`fixedM_char`; it does not integrate
    to ``1 - atom``.
    """
    if M < 1:
        raise ValueError("M must be positive")
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for j in range(M // 2 + 1):
        a = abs(1.0 - 2.0 * j / M)
        if a == 0.0:
            continue
        xj = x / a
        inside = np.abs(xj) < _EDGE
        xs = np.where(inside, xj, 0.0)
        term = comb(M, j) * konno_density(xs) / a
        if case == "A":
            r = np.sqrt(1.0 - 2.0 * xs * xs)
            term = term * ((1.0 + r) / 2.0) ** (M - j) * ((1.0 - r) / 2.0) ** j
        elif case == "B":
            term = term / 2.0**M
        else:
            raise ValueError("case must be 'A' or 'B'")
        out += np.where(inside, term, 0.0)
    return out


def atom_mass(M: int, case: str, phi0: ArrayLike = PHI0) -> float:
    """Mass at 0 of the fixed-M law: the ``j = M/2`` term (zero for odd M)."""
    if M % 2:
        return 0.0
    k = np.linspace(0.0, _TWO_PI, 4096, endpoint=False)
    p, q = _case_weights(M, phi0, case, k)
    return float(comb(M, M // 2) * np.mean((p * q) ** (M // 2)))


# catalog ---------------------------------------------------------------------

_INITS = {"phi0": PHI0, "ket1": KET_UP}


def _kv(parts: list[str]) -> dict[str, str]:
    out = {}
    for p in parts:
        if "=" not in p:
            raise UnknownLaw(f"expected key=value, got {p!r}")
        key, val = p.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def parse_law(name: str) -> LimitLaw:
    """Build a law from its catalog name, e.g. ``"arcsine:beta=0.5"``."""
    parts = [p for p in name.strip().split(":") if p]
    if not parts:
        raise UnknownLaw("empty law name")
    try:
        scale = None
        if parts[-1].startswith("scale="):
            scale = float(parts.pop().split("=", 1)[1])
        if not parts:
            raise UnknownLaw("missing law name before scale")
        law = _build(parts[0].lower(), parts[1:])
        return Scaled(law, scale) if scale is not None else law
    except UnknownLaw:
        raise
    except (KeyError, ValueError) as exc:
        raise UnknownLaw(f"bad law spec {name!r}: {exc}") from exc


def _build(head: str, rest: list[str]) -> LimitLaw:
    if head in ("dirac", "dirac0", "delta"):
        return Dirac0()
    if head in ("gaussian", "normal"):
        return Gaussian(float(_kv(rest).get("sigma", 1.0)))
    if head == "konno":
        return Konno()
    if head == "arcsine":
        return Arcsine(float(_kv(rest).get("beta", 0.0)))
    if head in ("gauss+arcsine", "gauss-plus-arcsine"):
        return GaussPlusArcsine(float(_kv(rest)["beta"]))
    if head in ("gauss*konno", "gauss-times-konno"):
        return GaussTimesKonno()
    if head == "product-sym":
        return ProductLimitSym()
    if head == "product-ket1":
        return ProductLimitKet1()
    if head in ("fixedm", "fixedd"):
        if not rest or rest[0].upper() not in ("A", "B"):
            raise UnknownLaw(f"{head} needs a case A or B")
        case, kv = rest[0].upper(), _kv(rest[1:])
        phi = _INITS[kv.get("init", "phi0")]
        if head == "fixedm":
            M = int(kv["M"])
            return FixedMA(M, phi) if case == "A" else FixedMB(M)
        d = int(kv["d"])
        return FixedDA(d, phi) if case == "A" else FixedDB(d)
    raise UnknownLaw(f"unknown law {head!r}")
