"""Parametric-bootstrap calibration of the mixture weight and the replicated
simulation experiment over growing sample sizes.

The experiment draws datasets from N(0, sigma^2) with sigma = 0.7 by default,
which deliberately matches neither unit-variance component, runs the mixture
sampler on each, and records weight summaries next to the exact posterior
model probability under half-half prior weights.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .bf import bf_normal_point_null
from .core import Dataset, DomainError, RandomStream, suff_stats
from .mixture import MhConfig, MixtureProblem, run_mh_batch, summarize

DEFAULT_SIZES = (10, 40, 100, 500)
DEFAULT_REPLICAS = 100
DEFAULT_A0_LIST = (0.1, 0.5, 1.0)
DEFAULT_DGP_SIGMA = 0.7

CSV_HEADER = ["n", "replica", "a0", "mean_alpha", "median_alpha",
              "post_prob_alt", "ess_alpha", "accept_alpha", "accept_mu",
              "status"]


@dataclass(frozen=True)
class BootstrapReport:
    observed_mean_alpha: float
    ref_quantile_under_f1: float
    ref_quantile_under_f0: float
    b: int


@dataclass(frozen=True)
class Fig1Record:
    n: int
    replica: int
    a0: float
    mean_alpha: float
    median_alpha: float
    post_prob_alt: float
    ess_alpha: float
    accept_alpha: float
    accept_mu: float
    status: str = "ok"


def _empirical_quantile(refs, observed) -> float:
    refs = np.asarray(refs, dtype=float)
    lt = float(np.sum(refs < observed))
    eq = float(np.sum(refs == observed))
    return (lt + 0.5 * eq) / len(refs)


def _mean_alphas(data_matrix, problem, config, streams):
    """Batched mean-alpha per dataset row, falling back to per-row runs with
    a failure budget when the batch itself dies."""
    try:
        chains = run_mh_batch(data_matrix, problem, config, streams)
        return [summarize(c).mean_alpha for c in chains]
    except Exception:
        out, failures = [], 0
        for row, stream in zip(np.atleast_2d(data_matrix), streams):
            try:
                chain = run_mh_batch(row.reshape(1, -1), problem, config, [stream])[0]
                out.append(summarize(chain).mean_alpha)
            except Exception:
                failures += 1
        if failures > 0.1 * len(streams):
            raise
        return out


def parametric_bootstrap(data: Dataset, problem: MixtureProblem, b: int,
                         config: MhConfig) -> BootstrapReport:
    """Locate the observed mean weight among b reference posteriors simulated
    under each pure component model.

    Reference data are posterior-predictive: the fixed component simulates
    N(0,1) directly; the free component first draws mu from its conjugate
    posterior given the observed data, then simulates N(mu, 1).
    """
    if b < 20:
        raise DomainError(f"need at least 20 bootstrap replicas, got {b}")
    n = data.n
    if n == 0:
        raise DomainError("cannot calibrate against an empty dataset")
    master = config.stream

    observed_chain = run_mh_batch(data.as_array().reshape(1, -1), problem,
                                  config, [master.derive(0)])[0]
    observed = summarize(observed_chain).mean_alpha

    # references under the fixed N(0,1) component
    f1_data = np.empty((b, n))
    f1_streams = []
    for j in range(b):
        s = master.derive(1, j)
        f1_data[j] = s.rng().standard_normal(n)
        f1_streams.append(master.derive(2, j))
    f1_refs = _mean_alphas(f1_data, problem, config, f1_streams)

    # references under the free-mean component, mu from its posterior
    post_mean = n * data.mean / (n + 1.0)
    post_sd = 1.0 / math.sqrt(n + 1.0)
    f0_data = np.empty((b, n))
    f0_streams = []
    for j in range(b):
        s = master.derive(3, j)
        rng = s.rng()
        mu = post_mean + post_sd * rng.standard_normal()
        f0_data[j] = mu + rng.standard_normal(n)
        f0_streams.append(master.derive(4, j))
    f0_refs = _mean_alphas(f0_data, problem, config, f0_streams)

    return BootstrapReport(
        observed_mean_alpha=observed,
        ref_quantile_under_f1=_empirical_quantile(f1_refs, observed),
        ref_quantile_under_f0=_empirical_quantile(f0_refs, observed),
        b=b,
    )


def _fig1_cell(n, n_idx, a0, a0_idx, replicas, dgp_sigma, config):
    """All replicas for one (n, a0) cell, batched across chains."""
    master = config.stream
    data_rows = np.empty((replicas, n))
    datasets = []
    streams = []
    for r in range(replicas):
        d_stream = master.derive(0, n_idx, r)
        data_rows[r] = dgp_sigma * d_stream.rng().standard_normal(n)
        datasets.append(suff_stats(data_rows[r]))
        streams.append(master.derive(1, n_idx, r, a0_idx))
    problem = MixtureProblem(a0=a0)
    records = []
    try:
        chains = run_mh_batch(data_rows, problem, config, streams)
    except Exception:
        chains = [None] * replicas
    for r in range(replicas):
        post_prob_alt = 1.0 - bf_normal_point_null(datasets[r], 0.5).posterior_prob_null
        chain = chains[r]
        if chain is None:
            records.append(Fig1Record(n=n, replica=r, a0=a0,
                                      mean_alpha=math.nan, median_alpha=math.nan,
                                      post_prob_alt=post_prob_alt,
                                      ess_alpha=math.nan, accept_alpha=math.nan,
                                      accept_mu=math.nan, status="failed"))
            continue
        s = summarize(chain)
        records.append(Fig1Record(
            n=n, replica=r, a0=a0,
            mean_alpha=s.mean_alpha, median_alpha=s.median_alpha,
            post_prob_alt=post_prob_alt, ess_alpha=s.ess_alpha,
            accept_alpha=chain.accept_rate_alpha,
            accept_mu=chain.accept_rate_mu,
        ))
    return records


def replicate_fig1(sizes=DEFAULT_SIZES, replicas=DEFAULT_REPLICAS,
                   a0_list=DEFAULT_A0_LIST, dgp_sigma=DEFAULT_DGP_SIGMA,
                   config: MhConfig = None, n_jobs: int = 1) -> list:
    """Replicated mixture-weight experiment: for each (n, replica, a0),
    simulate N(0, dgp_sigma^2) data, estimate the mixture weight, and record
    summaries plus the exact posterior model probability.

    Deterministic given the master seed in ``config.stream``; datasets are
    shared across a0 within a (n, replica) pair.  Records come back ordered
    by (n, replica, a0) regardless of execution order.
    """
    if config is None:
        config = MhConfig()
    sizes = sorted(set(int(n) for n in sizes))
    a0_list = sorted(set(float(a) for a in a0_list))
    if replicas < 1:
        raise DomainError("need at least one replica")

    cells = [(n, n_idx, a0, a0_idx)
             for n_idx, n in enumerate(sizes)
             for a0_idx, a0 in enumerate(a0_list)]

    if n_jobs != 1:
        from joblib import Parallel, delayed
        results = Parallel(n_jobs=n_jobs)(
            delayed(_fig1_cell)(n, n_idx, a0, a0_idx, replicas, dgp_sigma, config)
            for n, n_idx, a0, a0_idx in cells)
    else:
        results = [_fig1_cell(n, n_idx, a0, a0_idx, replicas, dgp_sigma, config)
                   for n, n_idx, a0, a0_idx in cells]

    records = [rec for cell in results for rec in cell]
    records.sort(key=lambda r: (r.n, r.replica, r.a0))
    return records


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else format(x, ".9g")
    return str(x)


def write_records_csv(records, path):
    """Atomically write the tidy record table; bytes are a pure function of
    the records."""
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)),
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in records:
                writer.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_records_csv(path) -> list:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            records.append(Fig1Record(
                n=int(row["n"]), replica=int(row["replica"]),
                a0=float(row["a0"]), mean_alpha=float(row["mean_alpha"]),
                median_alpha=float(row["median_alpha"]),
                post_prob_alt=float(row["post_prob_alt"]),
                ess_alpha=float(row["ess_alpha"]),
                accept_alpha=float(row["accept_alpha"]),
                accept_mu=float(row["accept_mu"]), status=row["status"]))
    return records


def emit_fig1_outputs(records, out_dir) -> list:
    """Write the tidy CSV, one boxplot figure per sample size, and the trend
    figure of averages across sizes; returns the written paths."""
    if not records:
        raise DomainError("no records to emit")
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "mixtest"
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    written = []

    csv_path = os.path.join(out_dir, "records.csv")
    write_records_csv(records, csv_path)
    written.append(csv_path)

    ok = [r for r in records if r.status == "ok"]
    sizes = sorted(set(r.n for r in ok))
    a0s = sorted(set(r.a0 for r in ok))
    colors = {"mean_alpha": "wheat", "median_alpha": "tan",
              "post_prob_alt": "steelblue"}
    labels = {"mean_alpha": "posterior mean of weight",
              "median_alpha": "posterior median of weight",
              "post_prob_alt": "posterior prob. of free-mean model"}

    for n in sizes:
        fig, ax = plt.subplots(figsize=(7, 4))
        pos, data, positions, box_colors, ticks, tick_pos = 0.0, [], [], [], [], []
        for a0 in a0s:
            cell = [r for r in ok if r.n == n and r.a0 == a0]
            start = pos
            for key in ("mean_alpha", "median_alpha", "post_prob_alt"):
                data.append([getattr(r, key) for r in cell])
                positions.append(pos)
                box_colors.append(colors[key])
                pos += 1.0
            ticks.append(f"a0={a0:g}")
            tick_pos.append((start + pos - 1.0) / 2.0)
            pos += 0.8
        bp = ax.boxplot(data, positions=positions, patch_artist=True, widths=0.7)
        for patch, c in zip(bp["boxes"], box_colors):
            patch.set_facecolor(c)
        ax.set_xticks(tick_pos)
        ax.set_xticklabels(ticks)
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(f"n = {n}")
        handles = [plt.Rectangle((0, 0), 1, 1, facecolor=colors[k])
                   for k in colors]
        ax.legend(handles, [labels[k] for k in colors], fontsize=8)
        path = os.path.join(out_dir, f"box_n{n}.svg")
        fig.savefig(path, format="svg")
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    styles = ["-", "--", ":", "-."]
    for i, a0 in enumerate(a0s):
        ls = styles[i % len(styles)]
        for key in ("mean_alpha", "median_alpha", "post_prob_alt"):
            avgs = [float(np.mean([getattr(r, key) for r in ok
                                   if r.n == n and r.a0 == a0]))
                    for n in sizes]
            ax.plot(sizes, avgs, ls, color=colors[key],
                    label=f"{labels[key]}, a0={a0:g}")
    ax.set_xscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("average over replicas")
    ax.legend(fontsize=7)
    path = os.path.join(out_dir, "trends.svg")
    fig.savefig(path, format="svg")
    plt.close(fig)
    written.append(path)
    return written
