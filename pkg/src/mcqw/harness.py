"""
Convergence checks for the multi-coin walk.

Scaled position laws ``X_t / t**theta`` from :mod:`mcqw.walk` are compared
with the limit laws of :mod:`mcqw.laws` along time ladders, using the
Kolmogorov-Smirnov distance. The asymptotic statements carry no rates, so a
ladder passes when KS strictly decreases and the last KS sits below a
calibrated ceiling (``data/golden_ceilings.json``).

Assumptions
-----------
``a``  Case A (all coins ``phi0``), ``t = M + M**beta``.
``b``  ``t = 2M``; ``M**beta`` leading ``phi0`` coins, the rest mixed.
``c``  all coins mixed, ``M ~ t**(1-beta)``, ``d ~ t**beta``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np
from numpy.typing import NDArray

from . import laws as L
from .walk import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    InitialSpec,
    PositionDistribution,
    WalkSpec,
    distribution,
    moments,
)

__all__ = [
    "ASSUMPTIONS",
    "FamilyPoint",
    "ScalingFamily",
    "PointResult",
    "ConvergenceReport",
    "critical_exponent",
    "predicted_law",
    "ks_distance",
    "ks_between_laws",
    "fit_exponent",
    "scaling_exponent",
    "evaluate_family",
    "phase_sweep",
    "double_limit_check",
    "corollary_check",
    "calibrate",
    "load_ceilings",
    "ceiling_key",
    "DEFAULT_LADDER",
    "ABOVE_CRITICAL_OFFSET",
]

ASSUMPTIONS = ("a", "b", "c", "fixedM", "fixedD", "binomial")
DEFAULT_LADDER = (125, 250, 500, 1000, 2000, 4000)
ABOVE_CRITICAL_OFFSET = 0.15
# minimum relative drop of the above-critical scaled std along a ladder
ABOVE_CRITICAL_DECAY = 0.30
EXPONENT_TOL = 0.05
_EPS = 1e-12


# families --------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyPoint:
    """One walk on a ladder, with its realized integer arithmetic."""

    spec: WalkSpec
    init: InitialSpec
    scale: float | None = None  # overrides t**theta when set

    @property
    def t(self) -> int:
        return self.spec.t

    @property
    def meta(self) -> dict:
        return {
            "t": self.spec.t,
            "M": self.spec.M,
            "d": self.spec.d,
            "q": self.spec.q,
            "n_pure": self.init.M - self.init.n_mixed,
            "n_mixed": self.init.n_mixed,
        }


def _near_integer_power(target: float, beta: float, slack: float = 0.08) -> int:
    """Integer M near ``target`` whose ``M**beta`` is closest to an integer."""
    lo = max(1, int(math.floor(target * (1.0 - slack))))
    hi = max(lo, int(math.ceil(target * (1.0 + slack))))
    M = np.arange(lo, hi + 1)
    frac = np.abs(M**beta - np.round(M**beta))
    best = np.flatnonzero(frac <= frac.min() + 1e-9)
    return int(M[best[np.argmin(np.abs(M[best] - target))]])


def _geometric(t_min: int, t_max: int, ratio: float = 2.0) -> list[int]:
    out, t = [], float(t_min)
    while t <= t_max * (1 + 1e-9):
        out.append(int(round(t)))
        t *= ratio
    return out


def _ladder_a(beta, times):
    pts = []
    for T in times:
        if beta >= 1.0:
            M = max(1, T // 2)
            pts.append(FamilyPoint(WalkSpec(M, 2 * M), InitialSpec.case_a(M)))
            continue
        # solve M + M**beta = T, then snap to a near-integer power
        m0 = float(T)
        for _ in range(50):
            m0 = T - m0**beta
        M = _near_integer_power(m0, beta)
        t = M + int(round(M**beta))
        pts.append(FamilyPoint(WalkSpec(M, t), InitialSpec.case_a(M)))
    return pts


def _ladder_b(beta, times):
    pts = []
    for T in times:
        M = _near_integer_power(T / 2.0, beta) if 0.0 < beta < 1.0 else max(1, T // 2)
        n = min(M, int(round(M**beta)))
        pts.append(FamilyPoint(WalkSpec(M, 2 * M), InitialSpec.mixture(M, n)))
    return pts


def _ladder_c(beta, t_min, t_max, min_points=4):
    """
    All-mixed family with exact powers ``M = d**((1-beta)/beta)`` so that
    ``t**((1+beta)/2) = sqrt(M) d``.

    For beta < 1/2 the free integer is d; the KS of the rescaled fixed-d law
    to its limit is much smaller when d is a multiple of 4, so 2, 3, 4 and
    then multiples of 4 are used. For beta >= 1/2 the free integer is an odd
    M (an even M leaves an atom at 0 in the fixed-M law).
    """
    if beta <= 0.0:
        return [FamilyPoint(WalkSpec(T, T), InitialSpec.case_b(T)) for T in _geometric(t_min, t_max)]
    if beta >= 1.0:
        return [FamilyPoint(WalkSpec(1, T), InitialSpec.case_b(1)) for T in _geometric(t_min, t_max)]
    r = (1.0 - beta) / beta
    cands = []
    if beta < 0.5:
        for d in [2, 3] + list(range(4, 65, 4)):
            M = int(round(d**r))
            cands.append((M * d, M, d))
    else:
        for M in range(3, 400, 2):
            d = int(round(M ** (1.0 / r)))
            cands.append((M * d, M, d))
    cands = sorted(set(c for c in cands if c[1] >= 1 and c[2] >= 1))
    chosen = [c for c in cands if c[0] <= t_max]
    if beta >= 0.5:
        # thin to a roughly geometric ladder, anchored at the top
        thin, last = [], math.inf
        for c in reversed(chosen):
            if c[0] * 1.8 <= last:
                thin.append(c)
                last = c[0]
        chosen = thin[::-1]
    # t_min is approximate: drop points well below it while enough remain,
    # then extend past t_max if the ladder is too short
    while len(chosen) > min_points and chosen[0][0] < 0.9 * t_min:
        chosen.pop(0)
    for c in cands:
        if len(chosen) >= min_points:
            break
        if c[0] > (chosen[-1][0] if chosen else 0):
            chosen.append(c)
    return [FamilyPoint(WalkSpec(M, t), InitialSpec.case_b(M)) for t, M, d in chosen]


@dataclass(frozen=True)
class ScalingFamily:
    """
    A time ladder of walks obeying one assumption's integer arithmetic.

    ``param`` is M for ``fixedM`` and d for ``fixedD``; unused otherwise.
    """

    assumption: str
    beta: float
    points: tuple[FamilyPoint, ...]
    param: int | None = None

    @classmethod
    def build(
        cls,
        assumption: str,
        beta: float = 0.0,
        t_max: int = 2000,
        t_min: int = 125,
        param: int | None = None,
        times: list[int] | None = None,
    ) -> "ScalingFamily":
        if assumption not in ASSUMPTIONS:
            raise ValueError(f"unknown assumption {assumption!r}")
        if not 0.0 <= beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        ts = list(times) if times else _geometric(t_min, t_max)
        if assumption == "a":
            pts = _ladder_a(beta, ts)
        elif assumption == "b":
            pts = _ladder_b(beta, ts)
        elif assumption == "c":
            pts = _ladder_c(beta, t_min, t_max)
        elif assumption == "binomial":
            pts = [FamilyPoint(WalkSpec(T, T), InitialSpec.case_a(T)) for T in ts]
        elif assumption == "fixedM":
            M = param or 2
            pts = [FamilyPoint(WalkSpec(M, M * max(1, T // M)), InitialSpec.case_a(M)) for T in ts]
        else:
            d = param or 2
            pts = [FamilyPoint(WalkSpec(max(1, T // d), d * max(1, T // d)), InitialSpec.case_b(max(1, T // d))) for T in ts]
        uniq = {p.t: p for p in pts}
        return cls(assumption, float(beta), tuple(uniq[t] for t in sorted(uniq)), param)

    @property
    def times(self) -> list[int]:
        return [p.t for p in self.points]


# predictions -----------------------------------------------------------------


def critical_exponent(assumption: str, beta: float) -> float:
    """Critical scaling exponent: ``max(1/2, beta)`` for a/b, ``(1+beta)/2`` for c."""
    if assumption in ("a", "b"):
        return max(0.5, beta)
    if assumption == "c":
        return 0.5 * (1.0 + beta)
    if assumption == "binomial":
        return 0.5
    if assumption == "fixedM":
        return 1.0
    if assumption == "fixedD":
        return 0.5
    raise ValueError(f"unknown assumption {assumption!r}")


def predicted_law(assumption: str, beta: float, theta: float | None = None, param: int | None = None) -> L.LimitLaw:
    """Limit of ``X_t / t**theta``; above the critical line it is the point mass at 0."""
    crit = critical_exponent(assumption, beta)
    if theta is None:
        theta = crit
    if theta > crit + _EPS:
        return L.Dirac0()
    if theta < crit - _EPS:
        raise ValueError("below the critical exponent the scaled walk does not converge")
    if assumption == "a":
        if beta < 0.5:
            return L.Gaussian()
        if beta == 0.5:
            return L.GaussPlusArcsine(0.0)
        return L.Arcsine(1.0 if beta >= 1.0 else 0.0)
    if assumption == "b":
        if beta < 0.5:
            return L.Gaussian()
        if beta == 0.5:
            return L.GaussPlusArcsine(0.5)
        return L.Arcsine(beta)
    if assumption == "c":
        if beta <= 0.0:
            return L.Gaussian()
        if beta >= 1.0:
            return L.Konno()
        return L.GaussTimesKonno()
    if assumption == "binomial":
        return L.Gaussian()
    if assumption == "fixedM":
        return L.FixedMA(param or 2)
    return L.FixedDB(param or 2)


# distances -------------------------------------------------------------------


def ks_distance(dist: PositionDistribution, theta: float, law: L.LimitLaw, scale: float | None = None) -> float:
    """
    Kolmogorov-Smirnov distance between ``X_t / t**theta`` and ``law``.

    The empirical CDF is a step function, so the supremum is attained at a
    jump, from one side or the other; both one-sided limits are compared
    with the law's ``cdf`` and ``cdf_left``. Atoms of the law are checked
    the same way.
    """
    t = dist.t
    if scale is None:
        scale = float(t) ** theta if t else 1.0
    keep = dist.mass > 0
    x = dist.positions[keep] / scale
    F = np.cumsum(dist.mass[keep])
    F = np.minimum(F, 1.0)
    F[-1] = 1.0
    F_prev = np.concatenate([[0.0], F[:-1]])
    gap = np.maximum(np.abs(F - law.cdf(x)), np.abs(F_prev - law.cdf_left(x)))
    out = float(gap.max())
    for loc, _ in law.atoms:
        i = np.searchsorted(x, loc, side="right")
        right = F[i - 1] if i > 0 else 0.0
        j = np.searchsorted(x, loc, side="left")
        left = F[j - 1] if j > 0 else 0.0
        a = np.array(loc)
        out = max(out, abs(right - float(law.cdf(a))), abs(left - float(law.cdf_left(a))))
    return min(out, 1.0)


def ks_between_laws(a: L.LimitLaw, b: L.LimitLaw, n: int = 20001) -> float:
    """KS distance of two laws on a dense grid covering both supports and atoms."""
    lo = min(a.support[0], b.support[0])
    hi = max(a.support[1], b.support[1])
    pad = 0.01 * max(hi - lo, 1e-3)
    x = np.linspace(lo - pad, hi + pad, n)
    extra = np.array([loc for law in (a, b) for loc, _ in law.atoms] + [0.0])
    x = np.union1d(x, extra)
    gap = np.maximum(np.abs(a.cdf(x) - b.cdf(x)), np.abs(a.cdf_left(x) - b.cdf_left(x)))
    return float(gap.max())


# exponents -------------------------------------------------------------------


def fit_exponent(times, stds) -> float:
    """Least-squares slope of ``log std`` against ``log t``."""
    t = np.asarray(times, dtype=np.float64)
    s = np.asarray(stds, dtype=np.float64)
    if t.size < 2:
        raise ValueError("need at least two points to fit an exponent")
    if np.any(s <= 0):
        raise ValueError("zero-variance family; exponent undefined")
    return float(np.polyfit(np.log(t), np.log(s), 1)[0])


def _compute(points, budget, jobs):
    """Distributions keyed by t; points over budget are left out."""
    def one(p: FamilyPoint):
        try:
            return p.t, distribution(p.spec, p.init, budget=budget)
        except BudgetExceeded as exc:
            return p.t, exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            res = list(pool.map(one, points))
    else:
        res = [one(p) for p in points]
    return dict(sorted(res, key=lambda r: r[0]))


def scaling_exponent(family: ScalingFamily, budget: float = DEFAULT_BUDGET, jobs: int = 1) -> float:
    """Fitted exponent of std(X_t) over the family's ladder (at least 4 points)."""
    if len(family.points) < 4:
        raise ValueError("need at least four time points")
    dists = _compute(family.points, budget, jobs)
    bad = [t for t, d in dists.items() if isinstance(d, BudgetExceeded)]
    if bad:
        raise dists[bad[0]]
    ts = list(dists)
    return fit_exponent(ts, [dists[t].std() for t in ts])


# reports ---------------------------------------------------------------------


@dataclass
class PointResult:
    t: int
    M: int
    d: int
    q: int
    n_pure: int
    n_mixed: int
    ks: float
    moments: list[float]
    std: float
    scaled_std_above: float


@dataclass
class ConvergenceReport:
    assumption: str
    beta: float
    theta: float
    law: str
    points: list[PointResult] = field(default_factory=list)
    theta_fit: float | None = None
    ks_monotone: bool = False
    ks_ceiling: float | None = None
    ks_below_ceiling: bool | None = None
    exponent_ok: bool = False
    above_critical_decay: float | None = None
    above_critical_ok: bool = False
    complete: bool = True
    skipped: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        ok = self.complete and self.ks_monotone and self.exponent_ok and self.above_critical_ok
        return ok and self.ks_below_ceiling is not False

    def summary(self) -> dict:
        out = asdict(self)
        out.pop("points")
        out["passed"] = self.passed
        return out

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    CSV_FIELDS = ("assumption", "beta", "theta", "law", "t", "M", "d", "q", "n_pure", "n_mixed",
                  "ks", "m1", "m2", "m3", "m4", "std", "scaled_std_above")

    def csv_rows(self) -> list[list]:
        rows = []
        for p in self.points:
            rows.append([self.assumption, self.beta, self.theta, self.law, p.t, p.M, p.d, p.q,
                         p.n_pure, p.n_mixed, p.ks, *p.moments, p.std, p.scaled_std_above])
        return rows


def ceiling_key(assumption: str, beta: float) -> str:
    return f"{assumption}:{beta:g}"


def load_ceilings() -> dict[str, float]:
    """Golden KS ceilings keyed by :func:`ceiling_key`; empty if absent."""
    try:
        text = resources.files("mcqw").joinpath("data/golden_ceilings.json").read_text()
    except FileNotFoundError:
        return {}
    return {k: float(v) for k, v in json.loads(text)["ceilings"].items()}


def evaluate_family(
    family: ScalingFamily,
    theta: float | None = None,
    law: L.LimitLaw | None = None,
    *,
    budget: float = DEFAULT_BUDGET,
    jobs: int = 1,
    ceilings: dict[str, float] | None = None,
) -> ConvergenceReport:
    """KS trajectory, moments and exponent fit for one family."""
    crit = critical_exponent(family.assumption, family.beta)
    theta = crit if theta is None else theta
    if law is None:
        law = predicted_law(family.assumption, family.beta, theta, family.param)
    rep = ConvergenceReport(family.assumption, family.beta, theta, law.name)
    dists = _compute(family.points, budget, jobs)
    above = theta + ABOVE_CRITICAL_OFFSET
    for p in family.points:
        dist = dists[p.t]
        if isinstance(dist, BudgetExceeded):
            rep.complete = False
            rep.skipped.append(p.t)
            continue
        m = p.meta
        rep.points.append(PointResult(
            t=p.t, M=m["M"], d=m["d"], q=m["q"], n_pure=m["n_pure"], n_mixed=m["n_mixed"],
            ks=ks_distance(dist, theta, law, p.scale),
            moments=[moments(dist, n, theta) for n in range(1, 5)],
            std=dist.std(),
            scaled_std_above=dist.std() / float(p.t) ** above,
        ))
    pts = rep.points
    if len(pts) >= 2:
        ks = [p.ks for p in pts]
        rep.ks_monotone = all(b < a for a, b in zip(ks, ks[1:]))
        if all(p.std > 0 for p in pts):
            rep.theta_fit = fit_exponent([p.t for p in pts], [p.std for p in pts])
            rep.exponent_ok = abs(rep.theta_fit - crit) <= EXPONENT_TOL
        s0, s1 = pts[0].scaled_std_above, pts[-1].scaled_std_above
        rep.above_critical_decay = 1.0 - s1 / s0 if s0 > 0 else None
        rep.above_critical_ok = rep.above_critical_decay is not None and rep.above_critical_decay >= ABOVE_CRITICAL_DECAY
    if ceilings is None:
        ceilings = load_ceilings()
    key = ceiling_key(family.assumption, family.beta)
    if key in ceilings and pts:
        rep.ks_ceiling = ceilings[key]
        rep.ks_below_ceiling = pts[-1].ks <= ceilings[key]
    return rep


def phase_sweep(
    assumption: str,
    betas,
    t_max: int = 4000,
    *,
    t_min: int = 125,
    budget: float = DEFAULT_BUDGET,
    jobs: int = 1,
    ceilings: dict[str, float] | None = None,
) -> list[ConvergenceReport]:
    """
    One report per beta at the critical exponent. Each report also carries
    the decay of the scaled std at ``theta + 0.15``, where the limit is the
    point mass at 0. Points over budget are skipped and the report is
    flagged incomplete.
    """
    if assumption not in ("a", "b", "c"):
        raise ValueError("phase sweeps are defined for assumptions a, b, c")
    out = []
    for beta in betas:
        fam = ScalingFamily.build(assumption, beta, t_max=t_max, t_min=t_min)
        out.append(evaluate_family(fam, budget=budget, jobs=jobs, ceilings=ceilings))
    return out


# double limits -----------------------------------------------------------------


def _balanced_family(phi_init: str, Ms, budget):
    res = []
    for M in Ms:
        init = InitialSpec.case_a(M) if phi_init == "phi0" else InitialSpec.ket1(M)
        spec = WalkSpec(M, M * M)
        res.append((spec.t, M, distribution(spec, init, budget=budget)))
    return res


def double_limit_check(
    ds=(2, 4, 8, 16, 32),
    Ms=(3, 7, 15, 31, 63),
    balanced_Ms=(11, 21, 41, 81, 121),
    budget: float = DEFAULT_BUDGET,
) -> dict:
    """
    Both routes to the product law, plus the balanced-growth limits.

    (i) ``Z_d / sqrt(d)`` against ``X*Z`` over ``ds``; (ii) ``sqrt(M)`` times
    the fixed-M mixed law against ``X*Z`` over ``Ms``; (iii)/(iv) Case A and
    ``|1>`` walks with ``d = M`` (``beta = 1/2``) against the two product
    laws.
    """
    target = L.GaussTimesKonno()
    fixed_d = [ks_between_laws(L.Scaled(L.FixedDB(d), 1.0 / math.sqrt(d)), target) for d in ds]
    fixed_m = [ks_between_laws(L.Scaled(L.FixedMB(M), math.sqrt(M)), target) for M in Ms]
    second = [L.FixedDB(d).moment(2) / d for d in ds]
    out = {
        "fixed_d": {"d": list(ds), "ks": fixed_d, "second_moment": second,
                    "monotone": _strict_decrease(fixed_d)},
        "fixed_m": {"M": list(Ms), "ks": fixed_m, "monotone": _strict_decrease(fixed_m)},
        "second_moment_target": 1.0 - 1.0 / math.sqrt(2.0),
    }
    for key, init, law in (("balanced_phi0", "phi0", L.ProductLimitSym()),
                           ("balanced_ket1", "ket1", L.ProductLimitKet1())):
        rows = _balanced_family(init, balanced_Ms, budget)
        ks = [ks_distance(dist, 1.0, law) for _, _, dist in rows]
        out[key] = {"t": [r[0] for r in rows], "M": [r[1] for r in rows], "ks": ks,
                    "second_moment": [moments(r[2], 2, 1.0) for r in rows],
                    "law_second_moment": law.moment(2), "monotone": _strict_decrease(ks)}
    out["passed"] = all(v["monotone"] for v in out.values() if isinstance(v, dict))
    return out


def _strict_decrease(v) -> bool:
    return all(b < a for a, b in zip(v, v[1:]))


def corollary_check(times=(250, 500, 1000, 2000), budget: float = DEFAULT_BUDGET) -> dict:
    """
    ``t = 2M``: Case A against the arcsine law on (-1/2, 1/2) at scale t, and
    the all-mixed walk against N(0,1) at scale sqrt(t).
    """
    a, b = [], []
    for t in times:
        M = t // 2
        spec = WalkSpec(M, 2 * M)
        a.append(ks_distance(distribution(spec, InitialSpec.case_a(M), budget=budget), 1.0, L.Arcsine(1.0)))
        b.append(ks_distance(distribution(spec, InitialSpec.case_b(M), budget=budget), 0.5, L.Gaussian()))
    return {
        "t": [2 * (t // 2) for t in times],
        "case_a_ks": a,
        "case_b_ks": b,
        "case_a_monotone": _strict_decrease(a),
        "case_b_monotone": _strict_decrease(b),
    }


CALIBRATION_BETAS = (0.2, 0.5, 0.8)
CEILING_HEADROOM = 1.25


def calibrate(t_max: int = 4000, headroom: float = CEILING_HEADROOM, budget: float = DEFAULT_BUDGET) -> dict:
    """
    Measure the top-of-ladder KS for every checked family and return the
    golden-ceiling document (measured value times ``headroom``).
    """
    measured = {}
    for a in ("a", "b", "c"):
        for r in phase_sweep(a, CALIBRATION_BETAS, t_max, budget=budget, ceilings={}):
            measured[ceiling_key(a, r.beta)] = r.points[-1].ks
    cor = corollary_check(budget=budget)
    measured["corollary:A"] = cor["case_a_ks"][-1]
    measured["corollary:B"] = cor["case_b_ks"][-1]
    dl = double_limit_check(budget=budget)
    measured["double:fixed_d"] = dl["fixed_d"]["ks"][-1]
    measured["double:fixed_m"] = dl["fixed_m"]["ks"][-1]
    measured["balanced:phi0"] = dl["balanced_phi0"]["ks"][-1]
    measured["balanced:ket1"] = dl["balanced_ket1"]["ks"][-1]
    return {
        "version": 1,
        "t_max": t_max,
        "headroom": headroom,
        "measured": measured,
        "ceilings": {k: round(v * headroom, 6) for k, v in measured.items()},
    }
