"""Bayes factors for the normal point null, Savage-Dickey ratios, and the
Cauchy-prior t-test Bayes factor with its scale sweep.

Model conventions:
  * point null: x_i ~ N(0, 1)
  * alternative: x_i ~ N(mu, 1) with a proper mu ~ N(0, 1) prior
  * t-test: common improper 1/sigma prior on sigma, Cauchy(0, gamma) prior
    on the effect size delta = mu/sigma; the marginal-likelihood ratio then
    depends on the data only through (t, n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, stats

from .core import LOG_2PI, Dataset, DomainError, NumericalError

# quadrature must reach this absolute error in log before a result is returned
QUAD_LOG_TOL = 1e-6


@dataclass(frozen=True)
class BfResult:
    """Log Bayes factor of null vs alternative plus the posterior model
    probability under the given prior weight on the null."""

    log_bf_null_vs_alt: float
    prior_weight_null: float
    posterior_prob_null: float


@dataclass(frozen=True)
class TTestProblem:
    t: float
    n: int
    gamma: float

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"t-test needs n >= 2, got {self.n}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class PriorRepresentative:
    """A prior density together with the density value chosen at the tested
    point.  The value at a single point is free measure-theoretically, which
    is exactly what breaks the Savage-Dickey ratio."""

    base_density: Callable[[float], float]
    value_at_null: Optional[float] = None

    def density_at_null(self) -> float:
        v = self.value_at_null if self.value_at_null is not None else self.base_density(0.0)
        if v < 0:
            raise DomainError(f"prior density value must be non-negative, got {v}")
        return v


def standard_normal_prior() -> PriorRepresentative:
    return PriorRepresentative(base_density=lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi))


@dataclass(frozen=True)
class SavageDickeyResult:
    """Savage-Dickey ratio, or an explicit ill-definedness signal when the
    chosen prior representative vanishes at the null."""

    ratio: Optional[float]
    pathological: bool = False
    message: str = ""

    @property
    def defined(self) -> bool:
        return not self.pathological


def _require_data(data: Dataset):
    if data.n == 0:
        raise DomainError("marginal likelihood undefined for an empty dataset")


def log_marginal_point_null(data: Dataset) -> float:
    """Log marginal likelihood of the N(0,1) model (no free parameters)."""
    _require_data(data)
    return -(data.n / 2.0) * LOG_2PI - data.sum_sq / 2.0


def log_marginal_normal_mean(data: Dataset) -> float:
    """Log marginal likelihood of the N(mu,1) model under mu ~ N(0,1),
    integrated in closed form."""
    _require_data(data)
    n = data.n
    return (-(n / 2.0) * LOG_2PI
            - 0.5 * math.log(n + 1.0)
            - 0.5 * (data.sum_sq - n * n * data.mean ** 2 / (n + 1.0)))


def posterior_prob_from_log_bf(log_bf: float, prior_weight_null: float) -> float:
    if not (0.0 < prior_weight_null < 1.0):
        raise DomainError(f"prior weight must lie in (0,1), got {prior_weight_null}")
    w = prior_weight_null
    # w*BF / (w*BF + 1-w), computed through the log for extreme BFs
    log_odds = math.log(w) - math.log1p(-w) + log_bf
    return 1.0 / (1.0 + math.exp(-log_odds))


def bf_normal_point_null(data: Dataset, prior_weight_null: float = 0.5) -> BfResult:
    """Bayes factor of the point null N(0,1) against N(mu,1), mu ~ N(0,1)."""
    log_bf = log_marginal_point_null(data) - log_marginal_normal_mean(data)
    return BfResult(
        log_bf_null_vs_alt=log_bf,
        prior_weight_null=prior_weight_null,
        posterior_prob_null=posterior_prob_from_log_bf(log_bf, prior_weight_null),
    )


def savage_dickey_normal(data: Dataset, prior: PriorRepresentative = None) -> SavageDickeyResult:
    """Posterior density of mu at 0 over the prior representative's value at 0.

    For the unmodified N(0,1) prior this equals the point-null Bayes factor;
    a vanishing representative gives a distinguished pathology signal rather
    than the naive (and wrong) value of zero.
    """
    _require_data(data)
    if prior is None:
        prior = standard_normal_prior()
    n = data.n
    # posterior of mu under the alternative: N(n*mean/(n+1), 1/(n+1))
    post_mean = n * data.mean / (n + 1.0)
    post_var = 1.0 / (n + 1.0)
    log_post_at_0 = -0.5 * LOG_2PI - 0.5 * math.log(post_var) - post_mean ** 2 / (2.0 * post_var)
    denom = prior.density_at_null()
    if denom == 0.0:
        return SavageDickeyResult(
            ratio=None,
            pathological=True,
            message="ratio diverges; Savage-Dickey value not well-defined "
                    "(prior representative is zero at the null)",
        )
    return SavageDickeyResult(ratio=math.exp(log_post_at_0) / denom)


def ttest_problem_from_values(values, gamma: float) -> TTestProblem:
    """Reduce raw observations to the (t, n) pair the Bayes factor depends on."""
    arr = np.asarray(list(values), dtype=float)
    n = len(arr)
    if n < 2:
        raise DomainError(f"t statistic needs n >= 2, got {n}")
    s = arr.std(ddof=1)
    if s == 0:
        raise DomainError("t statistic undefined for constant data")
    t = math.sqrt(n) * arr.mean() / s
    return TTestProblem(t=float(t), n=n, gamma=gamma)


def log_bf10_ttest(problem: TTestProblem) -> float:
    """Log Bayes factor of the Cauchy-prior alternative against the point
    null in the one-sample t-test, by adaptive quadrature over the effect size.

    Under the common improper sigma prior the marginal density of the data
    given delta reduces to a noncentral-t density of the t statistic, so the
    ratio is an average of noncentral-t densities over the Cauchy prior.  The
    Cauchy quantile substitution maps the real line to (0,1), which keeps the
    heavy tails tractable for any gamma.
    """
    t, n, gamma = problem.t, problem.n, problem.gamma
    nu = n - 1
    sqrt_n = math.sqrt(n)

    if gamma <= 1.0:
        # Cauchy-quantile substitution keeps the narrow prior resolvable
        def integrand(u):
            delta = gamma * math.tan(math.pi * (u - 0.5))
            return stats.nct.pdf(t, nu, delta * sqrt_n)

        val, abserr = integrate.quad(integrand, 0.0, 1.0, points=[0.5],
                                     limit=200, epsabs=1e-13, epsrel=1e-10)
    else:
        # wide prior: the t-density factor localizes the integrand, so
        # integrate in delta over its effective support (the truncated tail
        # contributes below machine precision)
        cap = (abs(t) + 40.0) / sqrt_n

        def integrand(delta):
            return (stats.nct.pdf(t, nu, delta * sqrt_n)
                    * math.exp(-math.log(math.pi * gamma)
                               - math.log1p((delta / gamma) ** 2)))

        val, abserr = integrate.quad(integrand, -cap, cap,
                                     points=[0.0, t / sqrt_n],
                                     limit=200, epsabs=1e-16, epsrel=1e-10)
    if val <= 0 or not math.isfinite(val):
        raise NumericalError(f"quadrature returned non-positive mass {val}", abserr)
    log_err = abserr / val
    if log_err > QUAD_LOG_TOL:
        raise NumericalError(
            f"quadrature error {log_err:.3g} in log exceeds tolerance {QUAD_LOG_TOL}",
            log_err,
        )
    return math.log(val) - stats.t.logpdf(t, nu)


def sweep_gamma(t: float, n: int, gammas) -> list:
    """One (gamma, log_bf10) row per scale; failed rows carry None and the
    error message instead of aborting the sweep."""
    gammas = list(gammas)
    if not gammas:
        raise DomainError("gamma sweep needs at least one scale")
    if any(g <= 0 for g in gammas):
        raise DomainError("gamma values must be positive")
    if any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise DomainError("gamma values must be strictly increasing")
    rows = []
    for g in gammas:
        try:
            rows.append((g, log_bf10_ttest(TTestProblem(t=t, n=n, gamma=g)), None))
        except NumericalError as exc:
            rows.append((g, None, str(exc)))
    return rows


def log_bf10_ttest_mc(t: float, n: int, gamma: float, draws: int = 10 ** 7,
                      rng: np.random.Generator = None) -> float:
    """Monte Carlo oracle for the t-test Bayes factor, integrating over
    (delta, sigma) directly on a synthetic dataset with the given (t, n).

    sigma is importance-sampled from its posterior under the null; the ratio
    of likelihoods then has a closed form per draw.  Kept independent of the
    quadrature path for cross-validation.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    xbar = t / math.sqrt(n)          # dataset with s = 1
    v = (n - 1) + t * t              # sum of squares about 0
    chunks = []
    chunk = 10 ** 6
    remaining = draws
    while remaining > 0:
        size = min(chunk, remaining)
        delta = gamma * np.tan(np.pi * (rng.random(size) - 0.5))
        inv_sig_sq = rng.gamma(n / 2.0, 2.0 / v, size=size)
        sigma = 1.0 / np.sqrt(inv_sig_sq)
        chunks.append(delta * n * xbar / sigma - n * delta ** 2 / 2.0)
        remaining -= size
    expo = np.concatenate(chunks)
    from scipy.special import logsumexp
    return float(logsumexp(expo) - math.log(len(expo)))
