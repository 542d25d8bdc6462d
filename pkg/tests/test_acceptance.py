"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line.  Run with ``pytest tests/test_acceptance.py -v -s``.

Monte Carlo criteria are pinned to fixed seeds; every tolerance is stated
inline next to its assertion.
"""

import math

import numpy as np
import pytest
from scipy import stats

from mixtest.bf import (TTestProblem, bf_normal_point_null, log_bf10_ttest,
                        log_bf10_ttest_mc, log_marginal_normal_mean,
                        savage_dickey_normal, ttest_problem_from_values)
from mixtest.calibration import (parametric_bootstrap, replicate_fig1,
                                 write_records_csv)
from mixtest.core import RandomStream, suff_stats
from mixtest.mixture import (MhConfig, MixtureProblem, posterior_grid, run_mh,
                             summarize)

from test_bf import quad_log_marginal_normal_mean


def report(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num}: {status} — {detail}")
    return ok


def test_01_savage_dickey_identity():
    """Savage-Dickey equals the closed-form Bayes factor to 1e-10 on 100
    seeded datasets with n <= 50."""
    rng = np.random.default_rng(1001)
    worst = 0.0
    for _ in range(100):
        d = suff_stats(rng.normal(0, 1, rng.integers(1, 51)))
        sd = savage_dickey_normal(d).ratio
        bf = math.exp(bf_normal_point_null(d).log_bf_null_vs_alt)
        worst = max(worst, abs(sd - bf) / max(1.0, bf))
    assert report(1, worst < 1e-10,
                  f"Savage-Dickey identity, worst relative gap {worst:.3e} < 1e-10")


def test_02_quadrature_vs_closed_form():
    """Closed-form free-mean marginal matches 1-D adaptive quadrature to
    1e-8 on 20 seeded datasets."""
    rng = np.random.default_rng(1002)
    worst = 0.0
    for _ in range(20):
        d = suff_stats(rng.normal(rng.uniform(-1, 1), 1.0, rng.integers(1, 40)))
        worst = max(worst, abs(log_marginal_normal_mean(d)
                               - quad_log_marginal_normal_mean(d)))
    assert report(2, worst < 1e-8,
                  f"marginal likelihood vs quadrature, worst gap {worst:.3e} < 1e-8")


def test_03_sampler_vs_grid_oracle():
    """MH at 10^4 iterations within 0.02 of the grid oracle, means and
    medians, on 10 seeded datasets."""
    specs = [(10, 0.5), (10, 1.0), (40, 0.5), (40, 1.0), (100, 0.5),
             (100, 1.0), (10, 0.5), (40, 1.0), (100, 0.5), (40, 0.5)]
    worst_mean = worst_median = 0.0
    for i, (n, a0) in enumerate(specs):
        data = suff_stats(np.random.default_rng(100 + i).normal(0, 0.7, n))
        problem = MixtureProblem(a0=a0)
        s = summarize(run_mh(data, problem, MhConfig(stream=RandomStream(320, i))))
        g = posterior_grid(data, problem, 400)
        worst_mean = max(worst_mean, abs(s.mean_alpha - g.mean_alpha))
        worst_median = max(worst_median, abs(s.median_alpha - g.median_alpha))
    ok = worst_mean < 0.02 and worst_median < 0.02
    assert report(3, ok, f"sampler vs oracle, worst |mean diff| {worst_mean:.4f}"
                         f" and |median diff| {worst_median:.4f} < 0.02")


def test_04_ttest_bayes_factor():
    """(a) gamma -> 0 collapse, (b) 10^7-draw Monte Carlo oracle within 1%
    relative on 5 (t, n, gamma) triples, (c) rescaling invariance."""
    for t, n in [(0.0, 10), (2.0, 30), (3.0, 50)]:
        lb = log_bf10_ttest(TTestProblem(t=t, n=n, gamma=1e-6))
        assert abs(lb) < 1e-3, f"collapse limit violated at (t={t}, n={n}): {lb}"

    triples = [(0.0, 10, 1.0), (2.5, 30, 1.0), (2.5, 30, 10.0),
               (2.0, 20, 0.5), (3.0, 50, 2.0)]
    worst_rel = 0.0
    for i, (t, n, g) in enumerate(triples):
        got = log_bf10_ttest(TTestProblem(t=t, n=n, gamma=g))
        oracle = log_bf10_ttest_mc(t, n, g, draws=10 ** 7,
                                   rng=np.random.default_rng(5000 + i))
        rel = abs(math.exp(got - oracle) - 1.0)
        worst_rel = max(worst_rel, rel)
    assert worst_rel < 0.01, f"MC oracle mismatch: {worst_rel:.4f}"

    vals = np.random.default_rng(1004).normal(0.5, 1.2, 25)
    base = log_bf10_ttest(ttest_problem_from_values(vals, 1.0))
    worst_scale = max(
        abs(log_bf10_ttest(ttest_problem_from_values(c * vals, 1.0)) - base)
        / abs(base)
        for c in (0.01, 7.0, 1000.0))
    assert worst_scale < 1e-4, f"rescaling invariance violated: {worst_scale:.2e}"
    assert report(4, True, f"t-test BF: collapse < 1e-3, oracle gap "
                           f"{worst_rel:.4f} < 1%, rescale gap {worst_scale:.2e} < 1e-4")


SIZES = (10, 40, 100, 500)
A0S = (0.1, 0.5, 1.0)


def _fig1_records(seed=42):
    cfg = MhConfig(iterations=10_000, burn_in=2_000, stream=RandomStream(seed))
    return replicate_fig1(sizes=SIZES, replicas=25, a0_list=A0S,
                          dgp_sigma=0.7, config=cfg)


def _replica_medians(records):
    return {a0: [float(np.median([r.mean_alpha for r in records
                                  if r.n == n and r.a0 == a0]))
                 for n in SIZES]
            for a0 in A0S}


@pytest.fixture(scope="module")
def fig1_records():
    return _fig1_records()


def test_05_fig1_reduced_scale(fig1_records, tmp_path):
    """Reduced-scale replication: weight medians strictly decreasing in n for
    each a0 (direction pre-confirmed by the grid oracle) and byte-identical
    CSV under a fixed master seed."""
    # grid-oracle pilot on the first replica of each size
    pilot = []
    master = RandomStream(42)
    for n_idx, n in enumerate(SIZES):
        d = suff_stats(0.7 * master.derive(0, n_idx, 0).rng().standard_normal(n))
        pilot.append(posterior_grid(d, MixtureProblem(a0=0.5), 300).mean_alpha)
    assert all(a > b for a, b in zip(pilot, pilot[1:])), \
        f"grid pilot not decreasing: {pilot}"

    assert all(r.status == "ok" for r in fig1_records)
    med = _replica_medians(fig1_records)
    for a0 in A0S:
        assert all(a > b for a, b in zip(med[a0], med[a0][1:])), \
            f"medians not decreasing at a0={a0}: {med[a0]}"

    p1, p2 = tmp_path / "run1.csv", tmp_path / "run2.csv"
    write_records_csv(fig1_records, p1)
    write_records_csv(_fig1_records(), p2)
    assert p1.read_bytes() == p2.read_bytes(), "CSV not byte-deterministic"
    assert report("5", True,
                  "reduced-scale replication: medians decreasing in n for all a0 "
                  "(grid-confirmed direction), CSV byte-deterministic")


@pytest.mark.xfail(
    strict=True,
    reason="the hyper-parameter spread does not stay below the sample-size "
           "spread for this model: the data-generating law N(0, 0.49) lies on "
           "the ridge mu = 0 where both mixture components coincide, so the "
           "weight posterior keeps prior (a0) influence at every n; confirmed "
           "by the independent grid oracle, see the project notes")
def test_05b_fig1_a0_spread_ordering(fig1_records):
    """Spread of replica-median weight across a0 at n = 500 should stay below
    the spread across n in {10, 500} at a0 = 0.5."""
    med = _replica_medians(fig1_records)
    at_500 = [med[a0][-1] for a0 in A0S]
    spread_a0 = max(at_500) - min(at_500)
    spread_n = abs(med[0.5][0] - med[0.5][-1])
    report("5b", spread_a0 < spread_n,
           f"a0 spread at n=500 is {spread_a0:.3f} vs size spread {spread_n:.3f}")
    assert spread_a0 < spread_n


def test_06_prior_recovery():
    """Empty-data and identical-component runs return the Beta(a0, a0) prior
    within Kolmogorov-Smirnov distance 0.02 at 10^4 draws."""
    cfg = MhConfig(stream=RandomStream(3))
    empty = run_mh(suff_stats([]), MixtureProblem(a0=1.0), cfg)
    ks_empty = stats.kstest(empty.draws_alpha, "uniform").statistic

    d = suff_stats(np.random.default_rng(0).normal(0, 1, 20))
    pinned = run_mh(d, MixtureProblem(a0=0.5, pin_mu=0.0), cfg)
    ks_pinned = stats.kstest(pinned.draws_alpha,
                             lambda x: stats.beta.cdf(x, 0.5, 0.5)).statistic
    ok = ks_empty < 0.02 and ks_pinned < 0.02
    assert report(6, ok, f"prior recovery, KS {ks_empty:.4f} (empty, a0=1) and "
                         f"{ks_pinned:.4f} (identical components, a0=0.5) < 0.02")


def test_07_bootstrap_self_calibration():
    """Reference quantiles under the fixed component are uniform across 200
    self-calibration runs (10-bin chi-square, p > 0.001) at n=50, b=50."""
    master = RandomStream(777)
    quantiles = []
    for run in range(200):
        data = suff_stats(master.derive(100, run).rng().standard_normal(50))
        cfg = MhConfig(iterations=1500, burn_in=500,
                       stream=master.derive(200, run))
        rep = parametric_bootstrap(data, MixtureProblem(a0=0.5), 50, cfg)
        quantiles.append(rep.ref_quantile_under_f1)
    counts, _ = np.histogram(quantiles, bins=10, range=(0.0, 1.0))
    _, p = stats.chisquare(counts)
    assert report(7, p > 0.001,
                  f"bootstrap self-calibration, chi-square p = {p:.3f} > 0.001")


def test_08_consistency_direction():
    """Mean log Bayes factor over 50 replicas of true-null data increases
    monotonically across n in {10, 40, 100, 500}."""
    rng = np.random.default_rng(1008)
    draws = rng.normal(0, 1, (50, 500))  # shared prefixes couple the levels
    means = []
    for n in SIZES:
        lbs = [bf_normal_point_null(suff_stats(row[:n])).log_bf_null_vs_alt
               for row in draws]
        means.append(float(np.mean(lbs)))
    ok = all(a < b for a, b in zip(means, means[1:]))
    assert report(8, ok, "true-null mean log BF increasing across n: "
                         + ", ".join(f"{m:.3f}" for m in means))
