"""
Named verification suites.

Each suite returns a list of :class:`Check` records; a suite passes when all
of its checks pass. The CLI ``verify`` command and the acceptance tests both
run these.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from . import harness as H
from . import laws as L
from .coin import KET_UP, PHI0, derivative_trace, group_velocity, mu_d, nu_d, spectral_derivatives
from .oracle import oracle_distribution
from .walk import DEFAULT_BUDGET, InitialSpec, WalkSpec, distribution, moments

__all__ = ["Check", "SUITES", "run_suite", "suite_names"]

SQRT2 = math.sqrt(2.0)


@dataclass
class Check:
    name: str
    value: float | list | None
    target: float | list | None
    tol: float | None
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _close(name, value, target, tol, note=""):
    ok = bool(np.all(np.abs(np.asarray(value) - np.asarray(target)) <= tol))
    return Check(name, value, target, tol, ok, note)


def oracle_inits(M: int) -> dict[str, InitialSpec]:
    """The four initial-state families of the equivalence grid."""
    return {
        "caseA": InitialSpec.case_a(M),
        "ket1": InitialSpec.ket1(M),
        "caseB": InitialSpec.case_b(M),
        "mix": InitialSpec.mixture(M, int(round(M**0.5))),
    }


def suite_oracle(max_M: int = 8, max_t: int = 20, **_) -> list[Check]:
    worst, where = 0.0, None
    for M in range(1, max_M + 1):
        for t in range(0, max_t + 1):
            spec = WalkSpec(M, t)
            for label, init in oracle_inits(M).items():
                tv = distribution(spec, init).tv(oracle_distribution(M, t, init))
                if tv >= worst:
                    worst, where = tv, f"M={M} t={t} {label}"
    return [Check("oracle_tv", worst, 0.0, 1e-10, worst < 1e-10, f"worst at {where}")]


def _substitution_lhs(g):
    # x = sin(u)/sqrt(2) removes the endpoint singularity of the Konno density
    def f(u):
        x = math.sin(u) / SQRT2
        return g(x) / (math.pi * SQRT2 * (1.0 - x * x))

    return integrate.quad(f, -math.pi / 2, math.pi / 2, epsabs=1e-13, epsrel=1e-13)[0]


def suite_lemmas(**_) -> list[Check]:
    k = np.linspace(0.0, 2.0 * np.pi, 1000, endpoint=False)
    out = []
    sd = spectral_derivatives(k, PHI0)
    out.append(_close("h0_plus_h1", float(np.max(np.abs(sd.h0 + sd.h1))), 0.0, 1e-12))
    out.append(_close("p_plus_q", float(np.max(np.abs(sd.p + sd.q - 1.0))), 0.0, 1e-12))
    kk = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    h = group_velocity(kk)
    for label, g in (("1", lambda x: 1.0), ("x^2", lambda x: x * x), ("x^4", lambda x: x**4)):
        lhs = _substitution_lhs(g)
        rhs = float(np.mean(np.vectorize(g)(h)))
        out.append(_close(f"substitution_{label}", lhs, rhs, 1e-6))
    out.append(_close("konno_second_moment", _substitution_lhs(lambda x: x * x), 1.0 - 1.0 / SQRT2, 1e-8))
    # spectral constants
    kg = np.linspace(0.0, 2.0 * np.pi, 257)
    out.append(_close("mu_1_zero", float(np.max(np.abs(mu_d(kg, 1, PHI0)))), 0.0, 1e-10))
    out.append(_close("mu_2_sin2k", float(np.max(np.abs(mu_d(kg, 2, PHI0) - np.sin(2 * kg) / 2))), 0.0, 1e-10))
    out.append(_close("nu_2_one", float(np.max(np.abs(nu_d(kg, 2) - 1.0))), 0.0, 1e-10))
    tr = max(float(np.max(np.abs(derivative_trace(kg, d)))) for d in range(1, 9))
    out.append(_close("derivative_trace_zero", tr, 0.0, 1e-10))
    return out


def moment_target(M: int) -> float:
    return 1.0 - 5.0 / (4.0 * SQRT2) + 1.0 / (4.0 * M * SQRT2)


def suite_moments(Ms=(2, 4), ds=(100, 250, 500), **_) -> list[Check]:
    out = []
    for M in Ms:
        target = moment_target(M)
        errs = []
        for d in ds:
            dist = distribution(WalkSpec(M, d * M), InitialSpec.ket1(M))
            errs.append(abs(moments(dist, 2, 1.0) - target))
        out.append(Check(f"second_moment_M{M}_d{ds[-1]}", errs[-1], 0.0, 5e-3, errs[-1] < 5e-3))
        out.append(Check(f"second_moment_M{M}_monotone", errs, None, None,
                         all(b < a for a, b in zip(errs, errs[1:]))))
    # the two fixed-d quadrature values under each reading of the symbol
    for d, target in ((2, 1.0 / 8.0), (3, 7.0 / 72.0)):
        ket1 = L.FixedDA(d, KET_UP).moment(2)
        out.append(_close(f"fixed_d{d}_ket1_second_moment", ket1, target, 1e-8,
                          "mu_d reading with |1> coins"))
        phi0 = L.FixedDA(d, PHI0).moment(2)
        mixed = L.FixedDB(d).moment(2)
        out.append(Check(f"fixed_d{d}_alternatives", [phi0, mixed], target, None, True,
                         "phi0 mu_d reading and all-mixed nu_d reading, reported only"))
    out.append(_close("product_ket1_second_moment", L.ProductLimitKet1().moment(2), 1.0 - 5.0 / (4.0 * SQRT2), 1e-8))
    return out


def suite_corollary(**kw) -> list[Check]:
    r = H.corollary_check(budget=kw.get("budget", DEFAULT_BUDGET))
    a, b = r["case_a_ks"], r["case_b_ks"]
    return [
        Check("caseA_arcsine_monotone", a, None, None, r["case_a_monotone"]),
        Check("caseA_arcsine_top", a[-1], 0.0, 0.05, a[-1] < 0.05),
        Check("caseB_gaussian_top", b[-1], 0.0, 0.03, b[-1] < 0.03),
    ]


def suite_theorem(assumption: str, betas=(0.2, 0.5, 0.8), t_max: int = 4000, budget: float = DEFAULT_BUDGET, **_) -> list[Check]:
    out = []
    for rep in H.phase_sweep(assumption, betas, t_max, budget=budget):
        tag = f"{assumption}_beta{rep.beta:g}"
        crit = H.critical_exponent(assumption, rep.beta)
        out.append(Check(f"{tag}_exponent", rep.theta_fit, crit, H.EXPONENT_TOL, rep.exponent_ok))
        out.append(Check(f"{tag}_ks_monotone", [p.ks for p in rep.points], None, None, rep.ks_monotone,
                         f"law {rep.law}"))
        out.append(Check(f"{tag}_above_critical_decay", rep.above_critical_decay, H.ABOVE_CRITICAL_DECAY, None,
                         rep.above_critical_ok))
        if rep.ks_ceiling is not None:
            out.append(Check(f"{tag}_ks_ceiling", rep.points[-1].ks, rep.ks_ceiling, None, bool(rep.ks_below_ceiling)))
        if not rep.complete:
            out.append(Check(f"{tag}_complete", rep.skipped, None, None, False, "points over budget"))
    return out


def suite_double_limit(budget: float = DEFAULT_BUDGET, **_) -> list[Check]:
    r = H.double_limit_check(budget=budget)
    out = []
    for key in ("fixed_d", "fixed_m", "balanced_phi0", "balanced_ket1"):
        out.append(Check(f"{key}_ks_monotone", r[key]["ks"], None, None, r[key]["monotone"]))
    out.append(_close("fixed_d_second_moment", r["fixed_d"]["second_moment"][-1], r["second_moment_target"], 1e-2))
    top = r["balanced_phi0"]["ks"][-1]
    out.append(Check("balanced_phi0_top", top, 0.0, 0.06, top < 0.06))
    x = np.linspace(-1.0 / math.sqrt(8.0), 1.0 / math.sqrt(8.0), 3)
    mass = integrate.quad(lambda u: float(L.ProductLimitSym().density(np.array(u))), x[0], x[-1], limit=200)[0]
    out.append(_close("product_sym_mass", mass, 1.0, 1e-8))
    return out


SUITES = {
    "oracle": suite_oracle,
    "lemmas": suite_lemmas,
    "moments": suite_moments,
    "corollary": suite_corollary,
    "theorem:a": lambda **kw: suite_theorem("a", **kw),
    "theorem:b": lambda **kw: suite_theorem("b", **kw),
    "theorem:c": lambda **kw: suite_theorem("c", **kw),
    "double-limit": suite_double_limit,
}


def suite_names() -> list[str]:
    return list(SUITES)


def run_suite(name: str, **kw) -> list[Check]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](**kw)
