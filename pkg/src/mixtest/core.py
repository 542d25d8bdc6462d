"""Numerically stable densities, sufficient statistics, and seeded random streams.

Everything here is a pure function of its inputs; RandomStream instances are
single-consumer but may be handed between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

LOG_2PI = math.log(2.0 * math.pi)


class DomainError(ValueError):
    """An argument violates an operation's precondition."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""

    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


@dataclass(frozen=True)
class Dataset:
    """Observations with cached sufficient statistics.

    ``mean`` is NaN when ``n == 0``; empty datasets are legal and flagged,
    not rejected.
    """

    values: tuple
    n: int
    mean: float
    sum_sq: float

    @property
    def mean_defined(self) -> bool:
        return self.n > 0

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def suff_stats(values) -> Dataset:
    """Build a Dataset, accumulating sums with compensated summation."""
    vals = tuple(float(v) for v in values)
    n = len(vals)
    if n == 0:
        return Dataset(values=vals, n=0, mean=math.nan, sum_sq=0.0)
    total = math.fsum(vals)
    sum_sq = math.fsum(v * v for v in vals)
    return Dataset(values=vals, n=n, mean=total / n, sum_sq=sum_sq)


def log_pdf_normal(x, mu, sigma):
    """Log density of N(mu, sigma^2) at x."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    z = (x - mu) / sigma
    return -0.5 * LOG_2PI - math.log(sigma) - 0.5 * z * z


def log_pdf_cauchy(x, loc, scale):
    """Log density of Cauchy(loc, scale) at x."""
    if scale <= 0:
        raise DomainError(f"scale must be positive, got {scale}")
    z = (x - loc) / scale
    return -math.log(math.pi * scale) - math.log1p(z * z)


def log_pdf_beta(a, a0, b0):
    """Log density of Beta(a0, b0) at a, for a strictly inside (0, 1)."""
    if not (0.0 < a < 1.0):
        raise DomainError(f"a must lie strictly in (0,1), got {a}")
    if a0 <= 0 or b0 <= 0:
        raise DomainError(f"shape parameters must be positive, got ({a0}, {b0})")
    return (a0 - 1.0) * math.log(a) + (b0 - 1.0) * math.log1p(-a) - special.betaln(a0, b0)


def log_sum_exp(terms):
    """log(sum(exp(terms))), stable for terms with magnitude up to ~700."""
    arr = np.asarray(list(terms) if not hasattr(terms, "__len__") else terms, dtype=float)
    if arr.size == 0:
        raise DomainError("log_sum_exp of an empty sequence")
    return float(special.logsumexp(arr))


@dataclass(frozen=True)
class RandomStream:
    """Deterministic, independently seedable random stream.

    Equal (seed, stream_id, path) reproduce identical draw sequences;
    distinct ids give statistically independent streams.  ``derive`` extends
    the path, giving reproducible substreams independent of execution order.
    """

    seed: int
    stream_id: int = 0
    path: tuple = field(default=())

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed,
                                    spawn_key=(self.stream_id, *self.path))
        return np.random.default_rng(ss)

    def derive(self, *keys: int) -> "RandomStream":
        return RandomStream(self.seed, self.stream_id, self.path + tuple(keys))
