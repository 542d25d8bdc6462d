"""Encompassing two-component mixture model and its posterior.

The model is x ~ alpha * N(mu, 1) + (1 - alpha) * N(0, 1), with priors
mu ~ N(0, 1) and alpha ~ Beta(a0, a0).  The posterior of alpha is explored
by component-wise random-walk Metropolis-Hastings on (logit alpha, mu), and
independently by tensor-grid quadrature as a cross-check oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .core import LOG_2PI, Dataset, DomainError, NumericalError, RandomStream

ADAPT_WINDOW = 50
ADAPT_TARGET = 0.44  # near-optimal acceptance for 1-D component updates
ALPHA_CLIP = 1e-300


@dataclass(frozen=True)
class MixtureProblem:
    """Mixture of a free-mean component against the fixed standard normal.

    alpha is the weight of the N(mu,1) component.  ``swapped`` exchanges the
    component roles (alpha then weighs N(0,1)); ``pin_mu`` / ``pin_alpha``
    freeze a coordinate, which the validation suite uses to collapse the
    model onto known targets.
    """

    a0: float = 0.5
    pin_mu: Optional[float] = None
    pin_alpha: Optional[float] = None
    swapped: bool = False

    def __post_init__(self):
        if self.a0 <= 0:
            raise DomainError(f"a0 must be positive, got {self.a0}")
        if self.pin_alpha is not None and not (0.0 <= self.pin_alpha <= 1.0):
            raise DomainError(f"pinned alpha must lie in [0,1], got {self.pin_alpha}")


@dataclass(frozen=True)
class MhConfig:
    iterations: int = 10_000
    burn_in: int = 2_000
    step_logit_alpha: float = 0.8
    step_mu: Optional[float] = None  # default 2.4 / sqrt(n+1), set at run time
    adapt: bool = True
    stream: RandomStream = field(default_factory=lambda: RandomStream(0))

    def __post_init__(self):
        if self.iterations < 100:
            raise DomainError(f"need at least 100 iterations, got {self.iterations}")
        if self.burn_in < 0:
            raise DomainError(f"burn-in must be non-negative, got {self.burn_in}")
        if self.step_logit_alpha <= 0:
            raise DomainError("step sizes must be positive")
        if self.step_mu is not None and self.step_mu <= 0:
            raise DomainError("step sizes must be positive")


@dataclass(frozen=True)
class Chain:
    draws_alpha: np.ndarray
    draws_mu: np.ndarray
    accept_rate_alpha: float
    accept_rate_mu: float


@dataclass(frozen=True)
class PosteriorSummary:
    mean_alpha: float
    median_alpha: float
    q05_alpha: float
    q95_alpha: float
    ess_alpha: float


def _log_std_normal(x):
    return -0.5 * LOG_2PI - 0.5 * np.square(x)


def _mix_loglik(log_a, log_1ma, l_free, l_fixed, swapped):
    """Summed mixture log likelihood; l_free/l_fixed are (..., n) arrays of
    per-point component log densities."""
    if swapped:
        log_a, log_1ma = log_1ma, log_a
    return np.logaddexp(log_a + l_free, log_1ma + l_fixed).sum(axis=-1)


def log_posterior_unnorm(alpha: float, mu: float, data: Dataset,
                         problem: MixtureProblem) -> float:
    """Unnormalized log posterior of (alpha, mu); alpha strictly interior."""
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie strictly in (0,1), got {alpha}")
    x = data.as_array()
    l_free = _log_std_normal(x - mu)
    l_fixed = _log_std_normal(x)
    loglik = float(_mix_loglik(math.log(alpha), math.log1p(-alpha),
                               l_free, l_fixed, problem.swapped))
    log_prior = (float(stats.beta.logpdf(alpha, problem.a0, problem.a0))
                 + float(_log_std_normal(np.asarray(mu))))
    return log_prior + loglik


def _fixed_weight_loglik(weight, l_free, l_fixed, swapped):
    # pinned alpha may sit on the boundary; logaddexp absorbs the -inf side
    with np.errstate(divide="ignore"):
        la, l1ma = np.log(weight), np.log1p(-weight)
    return _mix_loglik(la, l1ma, l_free, l_fixed, swapped)


def run_mh_batch(data_matrix: np.ndarray, problem: MixtureProblem,
                 config: MhConfig, streams) -> list:
    """Run one MH chain per row of ``data_matrix`` (shape (B, n)), each driven
    by its own stream.  Per-chain randomness is pregenerated from the chain's
    stream, so results are bitwise independent of batching and scheduling."""
    x = np.atleast_2d(np.asarray(data_matrix, dtype=float))
    B, n = x.shape
    T = config.burn_in + config.iterations
    step_mu_default = config.step_mu if config.step_mu is not None else 2.4 / math.sqrt(n + 1)

    # pregenerated per-chain draws: 2 normals + 2 uniforms per iteration
    z = np.empty((B, T, 2))
    u = np.empty((B, T, 2))
    for b, stream in enumerate(streams):
        rng = stream.rng()
        z[b] = rng.standard_normal((T, 2))
        u[b] = rng.random((T, 2))
    log_u = np.log(u)

    a0 = problem.a0
    l_fixed = _log_std_normal(x)  # (B, n)

    update_alpha = problem.pin_alpha is None
    update_mu = problem.pin_mu is None

    # state
    la = np.zeros(B)  # logit alpha, start at alpha = 1/2
    if update_mu:
        mu = x.mean(axis=1) if n > 0 else np.zeros(B)
    else:
        mu = np.full(B, float(problem.pin_mu))
    l_free = _log_std_normal(x - mu[:, None])

    def alpha_logs(la_):
        # stable log(alpha), log(1-alpha) from the logit
        return -np.logaddexp(0.0, -la_), -np.logaddexp(0.0, la_)

    def lik(log_a, log_1ma, l_free_):
        if not update_alpha:
            return _fixed_weight_loglik(problem.pin_alpha, l_free_, l_fixed,
                                        problem.swapped)
        return _mix_loglik(log_a[:, None], log_1ma[:, None], l_free_, l_fixed,
                           problem.swapped)

    log_a, log_1ma = alpha_logs(la)
    cur_lik = lik(log_a, log_1ma, l_free)
    # Beta(a0,a0) prior plus logit-Jacobian gives exponent a0 on both factors
    cur_pa = a0 * (log_a + log_1ma)
    cur_pm = -0.5 * mu ** 2
    if not np.all(np.isfinite(cur_lik + cur_pa + cur_pm)):
        raise NumericalError("non-finite log posterior at MH initialization")

    step_a = np.full(B, config.step_logit_alpha)
    step_m = np.full(B, step_mu_default)
    win_acc_a = np.zeros(B)
    win_acc_m = np.zeros(B)
    kept_acc_a = np.zeros(B)
    kept_acc_m = np.zeros(B)

    draws_a = np.empty((B, config.iterations))
    draws_m = np.empty((B, config.iterations))

    for t in range(T):
        if update_alpha:
            la_prop = la + z[:, t, 0] * step_a
            log_a_p, log_1ma_p = alpha_logs(la_prop)
            lik_p = lik(log_a_p, log_1ma_p, l_free)
            pa_p = a0 * (log_a_p + log_1ma_p)
            acc = log_u[:, t, 0] < (pa_p + lik_p) - (cur_pa + cur_lik)
            la = np.where(acc, la_prop, la)
            log_a = np.where(acc, log_a_p, log_a)
            log_1ma = np.where(acc, log_1ma_p, log_1ma)
            cur_lik = np.where(acc, lik_p, cur_lik)
            cur_pa = np.where(acc, pa_p, cur_pa)
            win_acc_a += acc
            if t >= config.burn_in:
                kept_acc_a += acc

        if update_mu:
            mu_prop = mu + z[:, t, 1] * step_m
            l_free_p = _log_std_normal(x - mu_prop[:, None])
            lik_p = lik(log_a, log_1ma, l_free_p)
            pm_p = -0.5 * mu_prop ** 2
            acc = log_u[:, t, 1] < (pm_p + lik_p) - (cur_pm + cur_lik)
            mu = np.where(acc, mu_prop, mu)
            cur_lik = np.where(acc, lik_p, cur_lik)
            cur_pm = np.where(acc, pm_p, cur_pm)
            l_free = np.where(acc[:, None], l_free_p, l_free)
            win_acc_m += acc
            if t >= config.burn_in:
                kept_acc_m += acc

        if config.adapt and t < config.burn_in and (t + 1) % ADAPT_WINDOW == 0:
            step_a *= np.exp(win_acc_a / ADAPT_WINDOW - ADAPT_TARGET)
            step_m *= np.exp(win_acc_m / ADAPT_WINDOW - ADAPT_TARGET)
            win_acc_a[:] = 0.0
            win_acc_m[:] = 0.0

        if t >= config.burn_in:
            k = t - config.burn_in
            draws_a[:, k] = np.clip(1.0 / (1.0 + np.exp(-la)), ALPHA_CLIP, 1.0 - 1e-16)
            draws_m[:, k] = mu

    if not update_alpha:
        draws_a[:] = np.clip(problem.pin_alpha, ALPHA_CLIP, 1.0 - 1e-16)

    chains = []
    for b in range(B):
        chains.append(Chain(
            draws_alpha=draws_a[b].copy(),
            draws_mu=draws_m[b].copy(),
            accept_rate_alpha=float(kept_acc_a[b] / config.iterations),
            accept_rate_mu=float(kept_acc_m[b] / config.iterations),
        ))
    return chains


def run_mh(data: Dataset, problem: MixtureProblem, config: MhConfig) -> Chain:
    """Single-chain wrapper around the batched sampler."""
    row = data.as_array().reshape(1, -1)
    return run_mh_batch(row, problem, config, [config.stream])[0]


def effective_sample_size(draws: np.ndarray) -> float:
    """ESS via Geyer's initial positive sequence truncation, capped at the
    chain length."""
    x = np.asarray(draws, dtype=float)
    n = len(x)
    x = x - x.mean()
    var = np.dot(x, x) / n
    if var == 0.0:
        return float(n)
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, m)
    acov = np.fft.irfft(f * np.conjugate(f), m)[:n].real / n
    rho = acov / acov[0]
    # pairwise sums of autocorrelations, truncated at the first negative pair
    npair = n // 2
    pair = rho[0:2 * npair:2] + rho[1:2 * npair:2]
    neg = np.nonzero(pair < 0.0)[0]
    cut = neg[0] if len(neg) else npair
    tau = max(2.0 * pair[:cut].sum() - 1.0, 1e-12)
    return float(min(n, n / tau))


def summarize(chain: Chain) -> PosteriorSummary:
    """Posterior summaries of the mixture weight from one chain."""
    a = chain.draws_alpha
    if len(a) < 100:
        raise DomainError(f"need a chain of length >= 100, got {len(a)}")
    return PosteriorSummary(
        mean_alpha=float(a.mean()),
        median_alpha=float(np.median(a)),
        q05_alpha=float(np.quantile(a, 0.05)),
        q95_alpha=float(np.quantile(a, 0.95)),
        ess_alpha=effective_sample_size(a),
    )


def _alpha_nodes(a0: float, resolution: int):
    """Equal-prior-mass midpoint nodes of Beta(a0, a0), mirrored so the grid
    is exactly symmetric about 1/2 (handles the a0 < 1 boundary spikes that
    defeat a uniform grid)."""
    half = resolution // 2
    p = (np.arange(half) + 0.5) / (2 * half)
    # keep nodes representably inside (0,1); the clip moves negligible mass
    lower = np.clip(stats.beta.ppf(p, a0, a0), 1e-15, 0.5)
    return np.concatenate([lower, 1.0 - lower[::-1]])


def _mu_nodes(data: Dataset, resolution: int):
    """Gauss-Legendre panels over [-8, 8], refined around the conditional
    posterior of mu (given alpha = 1) so large-n likelihood spikes resolve."""
    n = data.n
    m = n * data.mean / (n + 1.0) if n > 0 else 0.0
    s = 1.0 / math.sqrt(n + 1.0)
    lo, hi = max(-8.0, m - 8.0 * s), min(8.0, m + 8.0 * s)
    panels = [(-8.0, lo, resolution // 2), (lo, hi, resolution),
              (hi, 8.0, resolution // 2)]
    nodes, weights = [], []
    for a, b, k in panels:
        if b <= a:
            continue
        xg, wg = np.polynomial.legendre.leggauss(k)
        nodes.append(0.5 * (b - a) * xg + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * wg)
    return np.concatenate(nodes), np.concatenate(weights)


def posterior_grid(data: Dataset, problem: MixtureProblem,
                   resolution: int = 400) -> PosteriorSummary:
    """Quadrature oracle for the posterior of alpha, independent of the MH
    path: alpha on an equal-prior-mass grid, mu on Gauss-Legendre panels."""
    if resolution < 200:
        raise DomainError(f"resolution must be >= 200, got {resolution}")
    alphas = _alpha_nodes(problem.a0, resolution)
    log_a = np.log(alphas)
    log_1ma = np.log1p(-alphas)

    x = data.as_array()
    l_fixed = _log_std_normal(x)

    if problem.pin_mu is not None:
        mus = np.array([float(problem.pin_mu)])
        w_mu = np.array([1.0])
    else:
        mus, w_mu = _mu_nodes(data, resolution)

    # joint log weights W[k, j] over (alpha_k, mu_j); alpha prior is absorbed
    # by the equal-mass grid, mu prior enters explicitly
    A, M = len(alphas), len(mus)
    logW = np.empty((A, M))
    log_prior_mu = _log_std_normal(mus)
    for j in range(M):
        l_free = _log_std_normal(x - mus[j])
        logW[:, j] = (_mix_loglik(log_a[:, None], log_1ma[:, None],
                                  l_free[None, :], l_fixed[None, :],
                                  problem.swapped)
                      + log_prior_mu[j] + math.log(w_mu[j]) if w_mu[j] > 0
                      else -np.inf)
    logW -= logW.max()
    W = np.exp(logW)
    marg = W.sum(axis=1)
    total = marg.sum()
    if total <= 0 or not np.isfinite(total):
        raise NumericalError("grid posterior has no finite mass")
    pm = marg / total

    mean_alpha = float(np.dot(alphas, pm))
    cum = np.cumsum(pm)

    def quantile(q):
        idx = int(np.searchsorted(cum, q))
        idx = min(idx, A - 1)
        c_hi = cum[idx]
        c_lo = cum[idx - 1] if idx > 0 else 0.0
        a_lo = alphas[idx - 1] if idx > 0 else 0.0
        frac = (q - c_lo) / (c_hi - c_lo) if c_hi > c_lo else 0.5
        return float(a_lo + frac * (alphas[idx] - a_lo))

    return PosteriorSummary(
        mean_alpha=mean_alpha,
        median_alpha=quantile(0.5),
        q05_alpha=quantile(0.05),
        q95_alpha=quantile(0.95),
        ess_alpha=math.nan,
    )
