"""Closed-form upper bounds on the indicator expectations.

Every bound has the shape prefactor * exp(beta * c), so each one is computed
as a logarithm (``log_*``) and exponentiated at the end.  Overflow becomes
``inf``, never an exception.

The two-term estimates share two lower bounds on the partition function
(per bond, i.e. raised to the power 1 / (2 |sites|)):

    contracted term  D_c = (rho/2) exp(beta (U - mu R^2 - 2 lambda rho^2))
    expanded term    D_e = sqrt(pi / (beta (mu + 8 lambda))) exp(-beta u)

Dividing by only one of them gives a low-temperature and a high-temperature
estimate.  Keeping both and letting the volume grow gives their minimum.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .model import ModelParams, preset_params, satisfies_low_temperature_condition

LOG_SLACK = 1e-12  # absolute slack on log-scale comparisons, for round-off only


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def _check_beta(beta):
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")


def _parts(p: ModelParams):
    pr = p.profile
    return p.mu, p.lambda_, p.R, p.eps, pr.rho, pr.U, pr.U_bar, pr.u


def log_contracted_term(p: ModelParams, beta: float) -> float:
    mu, lam, R, eps, rho, U, Ub, u = _parts(p)
    return math.log(rho / 2) + beta * (U - mu * R * R - 2 * lam * rho * rho)


def log_expanded_term(p: ModelParams, beta: float) -> float:
    mu, lam, R, eps, rho, U, Ub, u = _parts(p)
    return 0.5 * math.log(math.pi / (beta * (mu + 8 * lam))) - beta * u


def log_bound_p_gt(p: ModelParams, beta: float) -> float:
    _check_beta(beta)
    mu, lam, R, eps, rho, U, Ub, u = _parts(p)
    return (math.log(2 * math.sqrt(2 * math.pi)) - math.log(rho) - 0.5 * math.log(beta * mu)
            - beta * (U - u - mu * R * R - 2 * lam * rho * rho))


def bound_p_gt(p: ModelParams, beta: float) -> float:
    """Upper bound on the probability that a bond is long; decays at large beta."""
    return _exp(log_bound_p_gt(p, beta))


def log_bound_p_lt(p: ModelParams, beta: float) -> float:
    _check_beta(beta)
    mu, lam, R, eps, rho, U, Ub, u = _parts(p)
    return (0.5 * math.log(2 * beta * (mu + 8 * lam) / math.pi) + math.log(rho)
            + beta * (Ub + u - mu * (rho - R) ** 2))


def bound_p_lt(p: ModelParams, beta: float) -> float:
    """Upper bound on the probability that a bond is short; small at small beta."""
    return _exp(log_bound_p_lt(p, beta))


def log_bound_pair(p: ModelParams, beta: float) -> tuple[float, float, float]:
    _check_beta(beta)
    mu, lam, R, eps, rho, U, Ub, u = _parts(p)
    low = (math.log(8 / rho) + 0.5 * math.log(math.pi / (beta * mu))
           + beta * (Ub + u - 2 * U - mu * (rho - R) ** 2 + 2 * mu * R * R
                     - lam * eps * eps + 4 * lam * rho * rho))
    high = (math.log(2 * rho * (mu + 8 * lam)) + 0.5 * math.log(beta / (math.pi * mu))
            + beta * (Ub + 3 * u - mu * (rho - R) ** 2 - lam * eps * eps))
    return low, high, min(low, high)


def bound_pair(p: ModelParams, beta: float) -> tuple[float, float, float]:
    """Short-long correlation of two lambda-neighbour bonds.

    Returns (low-temperature estimate, high-temperature estimate, their minimum).
    """
    return tuple(_exp(v) for v in log_bound_pair(p, beta))


def log_bound_p0(p: ModelParams, beta: float) -> float:
    _check_beta(beta)
    mu, lam, R, eps, rho, U, Ub, u = _parts(p)
    return (0.5 * math.log(2 * beta * (mu + 8 * lam) / math.pi) + math.log(eps)
            - beta * (mu * (rho + eps - R) ** 2 - 2 * u))


def bound_p0(p: ModelParams, beta: float) -> float:
    """Probability that a bond sits in the gap (rho, rho + eps)."""
    return _exp(log_bound_p0(p, beta))


def log_bound_stagger(p: ModelParams, beta: float) -> tuple[float, float, float]:
    _check_beta(beta)
    mu, lam, R, eps, rho, U, Ub, u = _parts(p)
    a = math.log(2.0) - beta * (U + mu * (rho - R) ** 2 - mu * R * R - 2 * lam * rho * rho)
    b = (math.log(rho) + 0.5 * math.log(beta * (mu + 8 * lam) / math.pi)
         - beta * (mu * (rho - R) ** 2 - u))
    return a, b, min(a, b)


def bound_stagger(p: ModelParams, beta: float) -> tuple[float, float, float]:
    """Probability that a bond is short and joins opposite spins; two estimates and their min."""
    return tuple(_exp(v) for v in log_bound_stagger(p, beta))


def log_pair_bound_finite(p: ModelParams, beta: float, n_sites: int) -> float:
    """Volume-|sites| root of the two-term bound on the alternating short/long event."""
    _check_beta(beta)
    mu, lam, R, eps, rho, U, Ub, u = _parts(p)
    log_num = (math.log(2 * rho * math.sqrt(math.pi / (beta * mu)))
               + beta * (Ub + u - mu * (rho - R) ** 2 - lam * eps * eps))
    log_den = np.logaddexp(2 * n_sites * log_contracted_term(p, beta),
                           2 * n_sites * log_expanded_term(p, beta))
    return float(log_num - log_den / n_sites)


def log_p0_bound_finite(p: ModelParams, beta: float, n_sites: int) -> float:
    """Volume-2|sites| root of the two-term bound on all bonds lying in the gap."""
    _check_beta(beta)
    mu, lam, R, eps, rho, U, Ub, u = _parts(p)
    log_num = math.log(math.sqrt(2) * eps) - beta * (mu * (rho + eps - R) ** 2 - u)
    log_den = np.logaddexp(2 * n_sites * log_contracted_term(p, beta),
                           2 * n_sites * log_expanded_term(p, beta))
    return float(log_num - log_den / (2 * n_sites))


def beta_star(R: float) -> float:
    """Intermediate inverse temperature 2 ln(R) / R^2 separating the two pair estimates."""
    if not R > 1:
        raise ValueError(f"beta_star needs R > 1, got {R!r}")
    return 2.0 * math.log(R) / (R * R)


class NoCrossover(ValueError):
    pass


def crossover_gap(p: ModelParams, beta: float) -> float:
    """log(D_c) - log(D_e); its root is where the two partition-function terms match."""
    return log_contracted_term(p, beta) - log_expanded_term(p, beta)


def solve_crossover(p: ModelParams, lo: float = 1e-6, hi: float = 1e2, rtol: float = 1e-10) -> float:
    """Bisect for the beta at which the contracted and expanded terms are equal."""
    f_lo, f_hi = crossover_gap(p, lo), crossover_gap(p, hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoCrossover(f"no crossover in range [{lo}, {hi}]")
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        f_mid = crossover_gap(p, mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BoundReport:
    beta: float
    p_gt_bound: float
    low_t_condition: bool
    p_lt_bound: float
    pair_low_t: float
    pair_high_t: float
    pair_bound: float
    p0_bound: float
    stagger_bound_a: float
    stagger_bound_b: float
    stagger_bound: float

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(p: ModelParams, beta: float) -> BoundReport:
    low, high, pair = bound_pair(p, beta)
    sa, sb, st = bound_stagger(p, beta)
    return BoundReport(
        beta=beta,
        p_gt_bound=bound_p_gt(p, beta),
        low_t_condition=satisfies_low_temperature_condition(p),
        p_lt_bound=bound_p_lt(p, beta),
        pair_low_t=low,
        pair_high_t=high,
        pair_bound=pair,
        p0_bound=bound_p0(p, beta),
        stagger_bound_a=sa,
        stagger_bound_b=sb,
        stagger_bound=st,
    )


@dataclass
class RegimeCheck:
    name: str
    passed: bool
    worst_value: float
    threshold: float
    worst_beta: float | None
    log_margin: float   # log(threshold) - log(worst value); >= 0 when passing


@dataclass
class RegimeReport:
    R: float
    delta: float
    beta_star: float
    checks: list[RegimeCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_text(self) -> str:
        lines = [f"R = {self.R!r}", f"delta = {self.delta!r}", f"beta_star = {self.beta_star!r}"]
        for c in self.checks:
            lines.append(
                f"{c.name}: {'PASS' if c.passed else 'FAIL'} worst={c.worst_value:.17g} "
                f"threshold={c.threshold:.17g} at_beta={c.worst_beta!r} log_margin={c.log_margin:.6g}"
            )
        lines.append(f"verdict: {'all pass' if self.passed else 'failing: ' + ', '.join(self.failing())}")
        return "\n".join(lines) + "\n"


def _worst(name, logs, betas, log_thr):
    i = int(np.argmax(logs))
    margin = log_thr - logs[i]
    return RegimeCheck(name, bool(margin >= -LOG_SLACK), _exp(logs[i]), _exp(log_thr),
                       float(betas[i]), float(margin))


def verify_regime(R: float, delta: float, beta_grid: Sequence[float]) -> RegimeReport:
    """Check the chain of inequalities for the preset parameter family on a beta grid.

    beta_star itself is added to the grid so that both sides of the split are
    always exercised.  A check with no grid point on its side passes vacuously.
    """
    betas = np.asarray(sorted(set(float(b) for b in beta_grid)), dtype=float)
    if betas.size == 0:
        raise ValueError("beta grid must be non-empty")
    if np.any(betas <= 0):
        raise ValueError("beta grid must be positive")
    p = preset_params(R, delta)
    bs = beta_star(R)
    betas = np.union1d(betas, [bs])
    logR = math.log(R)
    report = RegimeReport(R=R, delta=delta, beta_star=bs)

    lhs = p.profile.U - p.profile.u
    rhs = p.mu * R * R + 2 * p.lambda_ * p.rho ** 2
    ok = satisfies_low_temperature_condition(p)
    report.checks.append(RegimeCheck("low_temperature_condition", ok, rhs, lhs, None,
                                     math.log(lhs / rhs) if lhs > 0 else -math.inf))

    pairs = np.array([log_bound_pair(p, b)[:2] for b in betas])
    above, below = betas >= bs, betas <= bs
    report.checks.append(_worst("pair_low_t_above_beta_star", pairs[above, 0], betas[above],
                                -4 * delta ** 2 * logR))
    report.checks.append(_worst("pair_high_t_below_beta_star", pairs[below, 1], betas[below],
                                -3 * delta ** 2 * logR))

    p0 = np.array([log_bound_p0(p, b) for b in betas])
    report.checks.append(_worst("p0_sup", p0, betas,
                                math.log(6 * delta / (1 - 3 * delta) * math.sqrt(1 / (math.pi * math.e)))))

    st = np.array([log_bound_stagger(p, b)[1] for b in betas])
    a = (R - 1 / R) ** 2 - delta
    report.checks.append(_worst("stagger_sup", st, betas,
                                math.log(3 / R) + 0.5 * math.log(1 / (2 * math.pi * math.e * a))))
    return report


def log_grid(lo: float = 1e-5, hi: float = 10.0, n: int = 200) -> np.ndarray:
    return np.geomspace(lo, hi, n)
