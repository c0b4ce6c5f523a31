"""
Exact position statistics of the M-coin Hadamard walk.

The coin register is a product state, and the walk factorizes in momentum
space: coin ``j`` is flipped ``d + 1`` times if ``j < q`` and ``d`` times
otherwise (``t = d*M + q``). The characteristic function is therefore a
k-average of a product of per-coin overlaps, and the position distribution
follows by discrete Fourier inversion. The cost is ``O(t^2)`` and does not
depend on ``2**M``.

Both integrals are computed exactly:

* every per-coin overlap is pi-periodic in ``k`` with frequencies up to
  ``2t``, so a uniform rule with ``t + 1`` nodes on ``[0, pi)`` is exact;
* ``X`` has the parity of ``t``, so ``Y = (X + t)/2`` lives on
  ``{0..t}`` and ``t + 1`` inversion nodes suffice.

With ``k_n = pi n / N`` and ``xi_m = pi m / N`` the shifted momentum
``k_n + xi_m`` lands on node ``n + m``, so no amplitude is ever evaluated
off the grid.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import ArrayLike, NDArray

from .coin import KET_UP, PHI0, coin_power, propagate

__all__ = [
    "Pure",
    "MixedBasis",
    "MIXED",
    "InitialSpec",
    "WalkSpec",
    "PositionDistribution",
    "BudgetExceeded",
    "DEFAULT_BUDGET",
    "q_factor",
    "c_factor",
    "characteristic_function",
    "distribution",
    "distribution_cost",
    "moments",
    "binomial_distribution",
]

#: Default ceiling on ``(# xi nodes) * (# k nodes) * (# coin groups)``.
DEFAULT_BUDGET = 2.0e10


class BudgetExceeded(RuntimeError):
    def __init__(self, cost: float, budget: float):
        super().__init__(f"estimated cost {cost:.3g} exceeds budget {budget:.3g}")
        self.cost = cost
        self.budget = budget


@dataclass(frozen=True)
class Pure:
    """A coin prepared in a definite unit vector."""

    vec: tuple[complex, complex]

    def __post_init__(self):
        v = np.asarray(self.vec, dtype=np.complex128)
        if v.shape != (2,) or abs(np.vdot(v, v).real - 1.0) > 1e-12:
            raise ValueError(f"pure coin state must be a unit 2-vector, got {self.vec}")
        object.__setattr__(self, "vec", (complex(v[0]), complex(v[1])))

    @classmethod
    def of(cls, v: ArrayLike) -> "Pure":
        v = np.asarray(v, dtype=np.complex128)
        return cls((complex(v[0]), complex(v[1])))

    @property
    def array(self) -> NDArray[np.complex128]:
        return np.array(self.vec, dtype=np.complex128)


@dataclass(frozen=True)
class MixedBasis:
    """A coin drawn uniformly from {|1>, |-1>}, i.e. maximally mixed."""


MIXED = MixedBasis()

CoinInit = Union[Pure, MixedBasis]


@dataclass(frozen=True)
class InitialSpec:
    """Per-coin initial states; ``coins[j]`` is the coin flipped at steps j mod M."""

    coins: tuple[CoinInit, ...]

    def __post_init__(self):
        coins = tuple(self.coins)
        if not coins:
            raise ValueError("need at least one coin")
        for c in coins:
            if not isinstance(c, (Pure, MixedBasis)):
                raise TypeError(f"coin entries must be Pure or MixedBasis, got {c!r}")
        object.__setattr__(self, "coins", coins)

    @property
    def M(self) -> int:
        return len(self.coins)

    @property
    def n_mixed(self) -> int:
        return sum(isinstance(c, MixedBasis) for c in self.coins)

    @classmethod
    def product(cls, M: int, phi: ArrayLike) -> "InitialSpec":
        return cls((Pure.of(phi),) * M)

    @classmethod
    def case_a(cls, M: int) -> "InitialSpec":
        return cls.product(M, PHI0)

    @classmethod
    def case_b(cls, M: int) -> "InitialSpec":
        return cls((MIXED,) * M)

    @classmethod
    def ket1(cls, M: int) -> "InitialSpec":
        return cls.product(M, KET_UP)

    @classmethod
    def mixture(cls, M: int, n_pure: int, phi: ArrayLike = PHI0) -> "InitialSpec":
        """``n_pure`` leading coins in ``phi``, the rest MixedBasis."""
        if not 0 <= n_pure <= M:
            raise ValueError("n_pure must lie in [0, M]")
        return cls((Pure.of(phi),) * n_pure + (MIXED,) * (M - n_pure))


@dataclass(frozen=True)
class WalkSpec:
    M: int
    t: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        if self.t < 0:
            raise ValueError("t must be non-negative")

    @property
    def d(self) -> int:
        return self.t // self.M

    @property
    def q(self) -> int:
        return self.t % self.M


@dataclass(frozen=True)
class PositionDistribution:
    """Probability mass on positions ``-t..t``; ``mass[i]`` belongs to ``x = i - t``."""

    t: int
    mass: NDArray[np.float64] = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=np.float64)
        if m.shape != (2 * self.t + 1,):
            raise ValueError(f"mass must have length 2t+1 = {2 * self.t + 1}")
        if m.min() < -1e-9:
            raise ValueError(f"negative mass {m.min():.3g}")
        if abs(m.sum() - 1.0) > 1e-10:
            raise ValueError(f"mass sums to {m.sum()!r}")
        m = np.clip(m, 0.0, None)
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(-self.t, self.t + 1)

    def prob(self, x: int) -> float:
        if abs(x) > self.t:
            return 0.0
        return float(self.mass[x + self.t])

    def as_dict(self, tol: float = 0.0) -> dict[int, float]:
        return {int(x): float(p) for x, p in zip(self.positions, self.mass) if p > tol}

    def tv(self, other: "PositionDistribution") -> float:
        """Total-variation distance (half the l1 norm)."""
        T = max(self.t, other.t)
        a = np.zeros(2 * T + 1)
        b = np.zeros(2 * T + 1)
        a[T - self.t : T + self.t + 1] = self.mass
        b[T - other.t : T + other.t + 1] = other.mass
        return 0.5 * float(np.abs(a - b).sum())

    def std(self) -> float:
        x = self.positions
        m1 = float(self.mass @ x)
        return float(np.sqrt(max(self.mass @ (x * x) - m1 * m1, 0.0)))


def q_factor(k: ArrayLike, xi: ArrayLike, d: int, phi: ArrayLike) -> NDArray[np.complex128]:
    """``<Hk(k)^d phi, Hk(k+xi)^d phi>`` (conjugate-linear in the first slot)."""
    k = np.asarray(k, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    a = propagate(k, d, phi)
    b = propagate(k + xi, d, phi)
    return np.sum(a.conj() * b, axis=-1)


def c_factor(k: ArrayLike, xi: ArrayLike, d: int) -> NDArray[np.complex128]:
    """``Tr[Hk(k)^{-d} Hk(k+xi)^d] / 2``: the overlap averaged over both basis coins."""
    k = np.asarray(k, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    a = coin_power(k, d)
    b = coin_power(k + xi, d)
    return 0.5 * np.sum(a.conj() * b, axis=(-2, -1))


def _groups(spec: WalkSpec, init: InitialSpec) -> list[tuple[CoinInit, int, int]]:
    """Collapse coins into (state, flips, multiplicity) groups."""
    if init.M != spec.M:
        raise ValueError(f"init has {init.M} coins but spec has M = {spec.M}")
    d, q = spec.d, spec.q
    counts = Counter((c, d + 1 if j < q else d) for j, c in enumerate(init.coins))
    # deterministic order so that products are evaluated identically run to run
    keyed = sorted(counts.items(), key=lambda kv: (repr(kv[0][0]), kv[0][1]))
    return [(c, steps, n) for (c, steps), n in keyed]


def _ipow(f: NDArray[np.complex128], n: int) -> NDArray[np.complex128]:
    """``f**n`` by repeated squaring; numpy's complex power leaves its fast path for n >= 100."""
    out = None
    base = f
    while True:
        if n & 1:
            out = base.copy() if out is None else out * base
        n >>= 1
        if not n:
            return out
        base = base * base


def _amplitudes(coin: CoinInit, steps: int, k: NDArray[np.float64]):
    """Vectors whose inner products give the per-coin overlap, plus its prefactor."""
    if isinstance(coin, Pure):
        return propagate(k, steps, coin.array), 1.0
    return coin_power(k, steps).reshape(k.shape + (4,)), 0.5


def characteristic_function(spec: WalkSpec, init: InitialSpec, xi: ArrayLike) -> NDArray[np.complex128]:
    """``E exp(i xi X_t)`` for arbitrary real ``xi`` (scalar or array)."""
    xi = np.asarray(xi, dtype=np.float64)
    N = spec.t + 1
    k = np.pi * np.arange(N) / N
    out = np.ones(xi.shape + (N,), dtype=np.complex128)
    for coin, steps, n in _groups(spec, init):
        if steps == 0:
            continue
        a, pref = _amplitudes(coin, steps, k)
        b, _ = _amplitudes(coin, steps, k + xi[..., None])
        f = pref * np.sum(a.conj() * b, axis=-1)
        out *= _ipow(f, n)
    return out.mean(axis=-1)


def distribution_cost(spec: WalkSpec, init: InitialSpec, oversample: int = 1) -> float:
    N = oversample * (spec.t + 1)
    n_groups = sum(1 for _, s, _ in _groups(spec, init) if s > 0)
    return float(N // 2 + 1) * N * max(n_groups, 1)


def _threads() -> int:
    env = os.environ.get("MCQW_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def distribution(
    spec: WalkSpec,
    init: InitialSpec,
    *,
    oversample: int = 1,
    budget: float = DEFAULT_BUDGET,
    threads: int | None = None,
) -> PositionDistribution:
    """
    Exact law of ``X_t`` by Fourier inversion of the characteristic function.

    Parameters
    ----------
    oversample : int
        Multiplies both grid sizes. The result is independent of it up to
        rounding; exposed so that grid exactness can be checked.
    budget : float
        Upper bound on the grid work; ``BudgetExceeded`` is raised above it.
    threads : int, optional
        Worker threads over xi-blocks. Defaults to ``MCQW_THREADS`` or the
        CPU count. The output does not depend on it.
    """
    cost = distribution_cost(spec, init, oversample)
    if cost > budget:
        raise BudgetExceeded(cost, budget)
    t = spec.t
    if t == 0:
        return PositionDistribution(0, np.ones(1))
    N = oversample * (t + 1)
    n_xi = N // 2 + 1
    k = np.pi * np.arange(2 * N) / N

    factors = []
    for coin, steps, n in _groups(spec, init):
        if steps == 0:
            continue
        amp, pref = _amplitudes(coin, steps, k)
        factors.append((np.ascontiguousarray(amp.T), pref, n))

    phi = np.empty(n_xi, dtype=np.complex128)
    # rows of ~2**22 complex entries keep temporaries small
    block = max(1, min(n_xi, (1 << 22) // N))

    def work(m0: int) -> None:
        m1 = min(m0 + block, n_xi)
        acc = np.ones((m1 - m0, N), dtype=np.complex128)
        for amp, pref, n in factors:
            f = np.zeros((m1 - m0, N), dtype=np.complex128)
            for comp in amp:
                shifted = sliding_window_view(comp, N)[m0:m1]
                f += comp[:N].conj() * shifted
            if pref != 1.0:
                f *= pref
            acc *= f if n == 1 else _ipow(f, n)
        phi[m0:m1] = acc.mean(axis=1)

    starts = range(0, n_xi, block)
    nthreads = threads or _threads()
    if nthreads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(work, starts))
    else:
        for m0 in starts:
            work(m0)

    # characteristic function of Y = (X + t)/2 at eta_m = 2 pi m / N
    m = np.arange(n_xi)
    phi_y = phi * np.exp(1j * np.pi * m * t / N)
    py = np.fft.irfft(phi_y.conj(), n=N)
    if oversample > 1:
        tail = py[t + 1 :]
        if np.max(np.abs(tail), initial=0.0) > 1e-9:
            raise ArithmeticError("mass outside [-t, t]; inversion grid too coarse")
        py = py[: t + 1]
    if py.min() < -1e-9:
        raise ArithmeticError(f"inversion produced mass {py.min():.3g}")
    py = np.clip(py, 0.0, None)
    py /= py.sum()
    mass = np.zeros(2 * t + 1)
    mass[::2] = py
    return PositionDistribution(t, mass)


def moments(dist: PositionDistribution, n: int, scale_exponent: float = 0.0) -> float:
    """``E[(X_t / t**theta)**n]``."""
    if not 1 <= n <= 8:
        raise ValueError("moment order must be in 1..8")
    x = dist.positions / float(dist.t) ** scale_exponent if dist.t else dist.positions.astype(float)
    return float(dist.mass @ x**n)


def binomial_distribution(t: int) -> PositionDistribution:
    """Sum of t independent fair +-1 steps, for reference."""
    from scipy.stats import binom

    mass = np.zeros(2 * t + 1)
    mass[::2] = binom.pmf(np.arange(t + 1), t, 0.5)
    return PositionDistribution(t, mass)

