"""Command-line surface.

Exit codes: 0 success, 2 usage, 3 domain or parse error, 4 numerical
failure, 5 Savage-Dickey pathology signal.  Every numeric result printed
here comes from the same library call a user would make directly, and all
randomized commands are pure functions of (arguments, config file, seed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

from . import calibration
from .bf import (PriorRepresentative, TTestProblem, bf_normal_point_null,
                 log_bf10_ttest, savage_dickey_normal, sweep_gamma)
from .core import DomainError, NumericalError, RandomStream, suff_stats
from .mixture import MhConfig, MixtureProblem, run_mh, summarize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4
EXIT_PATHOLOGY = 5


class ParseError(DomainError):
    pass


def read_data_file(path):
    """One real per line; '#' starts a comment, blank lines are skipped."""
    if not os.path.exists(path):
        raise ParseError(f"data file not found: {path}")
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            try:
                values.append(float(body))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: not a number: {body!r}")
    return suff_stats(values)


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"bad config file {path}: {exc}")
    if not isinstance(cfg, dict):
        raise ParseError(f"config file {path} must hold a flat JSON object")
    return cfg


def _merge(args, config, key, default=None):
    """Flag beats config file beats default; flags parse with None defaults."""
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if key in config:
        return config[key]
    return default


def _require(value, name):
    if value is None:
        raise ParseError(f"missing required parameter: {name}")
    return value


def _render(payload, fmt):
    if fmt == "json":
        return json.dumps(payload, sort_keys=True) + "\n"
    # csv: header line + single row, nested tables get one row per entry
    if "rows" in payload:
        lines = [",".join(payload["columns"])]
        for row in payload["rows"]:
            lines.append(",".join(_num(v) for v in row))
        return "\n".join(lines) + "\n"
    keys = sorted(payload)
    return ",".join(keys) + "\n" + ",".join(_num(payload[k]) for k in keys) + "\n"


def _num(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".9g")
    return str(v)


def _emit(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_floats(text):
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError:
        raise ParseError(f"expected comma-separated numbers, got {text!r}")


def _parse_ints(text):
    return [int(v) for v in _parse_floats(text)]


def cmd_bf(args, config):
    data = read_data_file(args.data)
    w = float(_merge(args, config, "weight", 0.5))
    res = bf_normal_point_null(data, w)
    return _render({
        "log_bf_null_vs_alt": res.log_bf_null_vs_alt,
        "bf_null_vs_alt": math.exp(res.log_bf_null_vs_alt),
        "prior_weight_null": res.prior_weight_null,
        "posterior_prob_null": res.posterior_prob_null,
        "n": data.n,
    }, args.format), EXIT_OK


def cmd_ttest_bf(args, config):
    t = float(_require(_merge(args, config, "t"), "--t"))
    n = int(_require(_merge(args, config, "n"), "--n"))
    gamma = float(_require(_merge(args, config, "gamma"), "--gamma"))
    log_bf10 = log_bf10_ttest(TTestProblem(t=t, n=n, gamma=gamma))
    return _render({"t": t, "n": n, "gamma": gamma,
                    "log_bf10": log_bf10, "bf10": math.exp(log_bf10)},
                   args.format), EXIT_OK


def cmd_sweep_gamma(args, config):
    t = float(_require(_merge(args, config, "t"), "--t"))
    n = int(_require(_merge(args, config, "n"), "--n"))
    gammas = _parse_floats(_require(_merge(args, config, "gammas"), "--gammas"))
    rows = sweep_gamma(t, n, gammas)
    payload = {"columns": ["gamma", "log_bf10", "status"],
               "rows": [[g, lb if lb is not None else math.nan,
                         "ok" if err is None else "failed"]
                        for g, lb, err in rows]}
    if args.format == "json":
        payload = {"t": t, "n": n,
                   "rows": [{"gamma": g, "log_bf10": lb, "error": err}
                            for g, lb, err in rows]}
    return _render(payload, args.format), EXIT_OK


def cmd_sd(args, config):
    data = read_data_file(args.data)
    prior = PriorRepresentative(
        base_density=lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi),
        value_at_null=_merge(args, config, "value_at_null"),
    )
    res = savage_dickey_normal(data, prior)
    if res.pathological:
        sys.stderr.write(res.message + "\n")
        return "", EXIT_PATHOLOGY
    return _render({"savage_dickey_ratio": res.ratio, "n": data.n},
                   args.format), EXIT_OK


def _mh_config(args, config, seed):
    return MhConfig(
        iterations=int(_merge(args, config, "iterations", 10_000)),
        burn_in=int(_merge(args, config, "burn_in", 2_000)),
        stream=RandomStream(seed),
    )


def cmd_mixtest(args, config):
    data = read_data_file(args.data)
    a0 = float(_merge(args, config, "a0", 0.5))
    seed = int(_merge(args, config, "seed", 0))
    cfg = _mh_config(args, config, seed)
    chain = run_mh(data, MixtureProblem(a0=a0), cfg)
    s = summarize(chain)
    return _render({
        "n": data.n, "a0": a0, "seed": seed, "iterations": cfg.iterations,
        "mean_alpha": s.mean_alpha, "median_alpha": s.median_alpha,
        "q05_alpha": s.q05_alpha, "q95_alpha": s.q95_alpha,
        "ess_alpha": s.ess_alpha,
        "accept_alpha": chain.accept_rate_alpha,
        "accept_mu": chain.accept_rate_mu,
    }, args.format), EXIT_OK


def cmd_bootstrap(args, config):
    data = read_data_file(args.data)
    a0 = float(_merge(args, config, "a0", 0.5))
    b = int(_merge(args, config, "b", 100))
    seed = int(_merge(args, config, "seed", 0))
    cfg = _mh_config(args, config, seed)
    rep = calibration.parametric_bootstrap(data, MixtureProblem(a0=a0), b, cfg)
    return _render({
        "observed_mean_alpha": rep.observed_mean_alpha,
        "ref_quantile_under_f1": rep.ref_quantile_under_f1,
        "ref_quantile_under_f0": rep.ref_quantile_under_f0,
        "b": rep.b, "n": data.n, "a0": a0, "seed": seed,
    }, args.format), EXIT_OK


def cmd_fig1(args, config):
    seed = int(_merge(args, config, "seed", 0))
    if args.paper_scale:
        sizes = list(calibration.DEFAULT_SIZES)
        replicas = calibration.DEFAULT_REPLICAS
        sigma = calibration.DEFAULT_DGP_SIGMA
        iterations = 10_000
    else:
        sizes = _parse_ints(_merge(args, config, "sizes", "10,40,100,500"))
        replicas = int(_merge(args, config, "replicas", 25))
        sigma = float(_merge(args, config, "sigma", calibration.DEFAULT_DGP_SIGMA))
        iterations = int(_merge(args, config, "iterations", 10_000))
    a0_list = _parse_floats(_merge(args, config, "a0_list", "0.1,0.5,1"))
    jobs = int(_merge(args, config, "jobs", 1))
    out_dir = _require(_merge(args, config, "out"), "--out")
    cfg = MhConfig(iterations=iterations,
                   burn_in=int(_merge(args, config, "burn_in", 2_000)),
                   stream=RandomStream(seed))
    records = calibration.replicate_fig1(sizes=sizes, replicas=replicas,
                                         a0_list=a0_list, dgp_sigma=sigma,
                                         config=cfg, n_jobs=jobs)
    written = calibration.emit_fig1_outputs(records, out_dir)
    return "".join(p + "\n" for p in written), EXIT_OK


def cmd_plot(args, config):
    records = calibration.read_records_csv(args.records)
    out_dir = _require(_merge(args, config, "out"), "--out")
    written = calibration.emit_fig1_outputs(records, out_dir)
    return "".join(p + "\n" for p in written), EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON file of defaults; flags override")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out-file", dest="out_file",
                        help="write rendered output here instead of stdout")

    p = argparse.ArgumentParser(prog="mixtest",
                                description="Bayesian testing via Bayes factors "
                                            "and mixture-weight estimation",
                                parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    sp = add_parser("bf", help="point-null normal Bayes factor")
    sp.add_argument("data")
    sp.add_argument("--weight", type=float)
    sp.set_defaults(func=cmd_bf)

    sp = add_parser("ttest-bf", help="Cauchy-prior t-test Bayes factor")
    sp.add_argument("--t", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--gamma", type=float,
                    help="Cauchy prior scale (no default on purpose)")
    sp.set_defaults(func=cmd_ttest_bf)

    sp = add_parser("sweep-gamma", help="t-test Bayes factor across scales")
    sp.add_argument("--t", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--gammas", help="comma-separated increasing scales")
    sp.set_defaults(func=cmd_sweep_gamma)

    sp = add_parser("sd", help="Savage-Dickey ratio")
    sp.add_argument("data")
    sp.add_argument("--value-at-null", dest="value_at_null", type=float,
                    help="override the prior density value at the null")
    sp.set_defaults(func=cmd_sd)

    sp = add_parser("mixtest", help="mixture-weight posterior summary")
    sp.add_argument("data")
    sp.add_argument("--a0", type=float)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--burn-in", dest="burn_in", type=int)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_mixtest)

    sp = add_parser("bootstrap", help="parametric bootstrap calibration")
    sp.add_argument("data")
    sp.add_argument("--a0", type=float)
    sp.add_argument("--b", type=int)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--burn-in", dest="burn_in", type=int)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_bootstrap)

    sp = add_parser("fig1", help="replicated experiment across sample sizes")
    sp.add_argument("--sizes")
    sp.add_argument("--replicas", type=int)
    sp.add_argument("--a0-list", dest="a0_list")
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--burn-in", dest="burn_in", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--out")
    sp.add_argument("--paper-scale", action="store_true",
                    help="full-scale defaults: sizes 10..500, 100 replicas, "
                         "sigma 0.7, 10^4 iterations")
    sp.set_defaults(func=cmd_fig1)

    sp = add_parser("plot", help="re-emit figures from a records CSV")
    sp.add_argument("records")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.format = args.format or "json"
    try:
        config = _load_config(args.config)
        text, code = args.func(args, config)
        if text:
            _emit(text, args.out_file)
        return code
    except ParseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
