"""Command line front end: ``python -m ta2s2 <command> ...``.

Every option can also come from a flat ``key = value`` file passed with
``--config``; keys match the long option names (``-`` or ``_`` both work).
Command-line values win over the file. ``TA2S2_WORKERS`` overrides the worker
count.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .benchmarks import MODELS, lhs_design, rescale_to_unit, simulate
from .experiment import ExperimentSpec, run_experiment
from .gp import EXPONENT_CONVENTIONS, PRIOR_KINDS, KernelConfig, PriorSpec
from .io import (ingest_csv, read_matrix, read_samples, write_csv, write_json, write_samples,
                 write_table)
from .scoring import (component_predictions, crps_gaussian, crps_mixture, map_estimate,
                      mixture_moments, predictive_mixtures, rmse)
from .tmcmc import RunConfig, run_ta2s2


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _add_run_options(p):
    g = p.add_argument_group("sampler")
    g.add_argument("--N", type=int, default=500, help="samples per annealing level")
    g.add_argument("--gamma", type=float, default=0.5, help="target ESS fraction")
    g.add_argument("--c0", type=float, default=None, help="proposal spread (default 2.38/sqrt(dim))")
    g.add_argument("--p-renew", type=float, default=0.1)
    g.add_argument("--max-crumbs", type=int, default=100)
    g.add_argument("--max-levels", type=int, default=50)
    g.add_argument("--prior", choices=[k for k in PRIOR_KINDS if k != "custom"], default="uniform_log")
    g.add_argument("--prior-mean", type=float, default=5.0, help="exponential prior mean")
    g.add_argument("--prior-low", type=float, default=-7.0)
    g.add_argument("--prior-high", type=float, default=7.0)
    g.add_argument("--exponent", choices=EXPONENT_CONVENTIONS, default="n_minus_p")
    g.add_argument("--lower-bound", type=float, default=1e-12, help="nugget lower bound")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--thin", type=int, default=1)


def _run_config(args, seed) -> RunConfig:
    prior = PriorSpec(args.prior, low=args.prior_low, high=args.prior_high, mean=args.prior_mean)
    kernel = KernelConfig(lower_bound=args.lower_bound, exponent_convention=args.exponent)
    workers = int(os.environ.get("TA2S2_WORKERS", args.workers))
    return RunConfig(N=args.N, gamma=args.gamma, c0=args.c0, p_renew=args.p_renew,
                     max_crumbs=args.max_crumbs, max_levels=args.max_levels, prior=prior,
                     kernel=kernel, seed=seed, workers=workers, thin=args.thin)


def _kernel(args) -> KernelConfig:
    return KernelConfig(lower_bound=args.lower_bound, exponent_convention=args.exponent)


def cmd_design(args):
    X = lhs_design(args.n, args.p, np.random.default_rng(args.seed))
    write_csv(args.out, X)


def cmd_simulate(args):
    _, U = read_matrix(args.design)
    write_csv(args.out, U, simulate(args.model, U))


def cmd_sample(args):
    data = ingest_csv(args.data)
    cfg = _run_config(args, args.seed)
    report = run_ta2s2(data.train, cfg)
    pts, H = report.thinned()
    write_samples(args.out, pts, H)
    if args.report:
        write_json(args.report, {"config": cfg.describe(), "ladder": report.ladder,
                                 "timings": {"sampling": report.seconds}})


def cmd_predict(args):
    data = ingest_csv(args.data)
    points, H = read_samples(args.samples)
    _, Xq = read_matrix(args.query)
    if data.input_bounds is not None:
        Xq = rescale_to_unit(Xq, data.input_bounds)
    kernel = _kernel(args)
    mixes = predictive_mixtures(points, data.train, Xq, cfg=kernel)
    theta, _ = map_estimate(points, H)
    mu_map, s2_map, _ = component_predictions(theta[None, :], data.train, Xq, kernel)
    rows = []
    for i, m in enumerate(mixes):
        mu, s2 = mixture_moments(m)
        rows.append([float(v) for v in Xq[i]] + [mu, s2, float(mu_map[0, i]), float(s2_map[0, i])])
    header = [f"x{i + 1}" for i in range(Xq.shape[1])] + ["mu", "s2", "mu_map", "s2_map"]
    write_table(args.out, header, rows)


def cmd_score(args):
    data = ingest_csv(args.data, args.test)
    points, H = read_samples(args.samples)
    kernel = _kernel(args)
    test = data.test
    mixes = predictive_mixtures(points, data.train, test.X, cfg=kernel)
    theta, _ = map_estimate(points, H)
    mu_map, s2_map, _ = component_predictions(theta[None, :], data.train, test.X, kernel)
    crps_mix = [crps_mixture(m, y) for m, y in zip(mixes, test.y)]
    crps_map = [crps_gaussian(m, s, y) for m, s, y in zip(mu_map[0], s2_map[0], test.y)]
    result = {
        "crps": {"mixture": crps_mix, "map": crps_map},
        "mean_crps": {"mixture": float(np.mean(crps_mix)), "map": float(np.mean(crps_map))},
        "rmse": {"mixture": rmse([mixture_moments(m)[0] for m in mixes], test.y),
                 "map": rmse(mu_map[0], test.y)},
    }
    if args.out:
        write_json(args.out, result)
    else:
        print("mean CRPS  mixture {:.6g}  map {:.6g}".format(*result["mean_crps"].values()))
        print("RMSE       mixture {:.6g}  map {:.6g}".format(*result["rmse"].values()))


def cmd_experiment(args):
    if args.model == "external_csv" and not (args.train_csv and args.test_csv):
        raise SystemExit("external_csv needs --train-csv and --test-csv")
    spec = ExperimentSpec(model=args.model, n_train=args.n_train, n_test=args.n_test,
                          repeats=args.repeats, run=_run_config(args, args.seed),
                          output_dir=args.out, train_csv=args.train_csv, test_csv=args.test_csv,
                          data_seed=args.data_seed, scoring_size=args.scoring_size)
    summary = run_experiment(spec)
    for r in summary["repeats"]:
        if r["status"] == "ok":
            print(f"repeat {r['repeat']}: levels={r['levels']} "
                  f"crps mixture={r['mean_crps']['mixture']:.6g} map={r['mean_crps']['map']:.6g}")
        else:
            print(f"repeat {r['repeat']}: failed ({r['error']})")
    print(f"mixture <= map in {summary['mixture_wins']}/{summary['completed']} repeats")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ta2s2", description="GP emulation with annealed slice sampling of hyper-parameters.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="Latin hypercube design on the unit cube")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="evaluate a benchmark on a unit-cube design")
    p.add_argument("--model", choices=sorted(MODELS), required=True)
    p.add_argument("--design", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sample", help="sample GP hyper-parameters")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="sample CSV")
    p.add_argument("--report", help="optional JSON run report")
    _add_run_options(p)
    p.set_defaults(func=cmd_sample)

    for name, func, helptext in (("predict", cmd_predict, "mixture predictions at query points"),
                                 ("score", cmd_score, "CRPS and RMSE on a test set")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--data", required=True)
        p.add_argument("--samples", required=True)
        if name == "predict":
            p.add_argument("--query", required=True)
            p.add_argument("--out", required=True)
        else:
            p.add_argument("--test", required=True)
            p.add_argument("--out")
        p.add_argument("--exponent", choices=EXPONENT_CONVENTIONS, default="n_minus_p")
        p.add_argument("--lower-bound", type=float, default=1e-12)
        p.set_defaults(func=func)

    p = sub.add_parser("experiment", help="repeated mixture-versus-MAP comparison")
    p.add_argument("--model", choices=sorted(MODELS) + ["external_csv"], default="franke")
    p.add_argument("--n-train", type=int, default=20)
    p.add_argument("--n-test", type=int, default=100)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--scoring-size", type=int, default=100)
    p.add_argument("--train-csv")
    p.add_argument("--test-csv")
    p.add_argument("--out", required=True)
    _add_run_options(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def _apply_config(parser, argv):
    """Turn ``--config FILE`` entries into parser defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if known.config is None:
        return rest
    values = read_config(known.config)
    command = next((a for a in rest if not a.startswith("-")), None)
    subparsers = parser._subparsers._group_actions[0].choices
    target = subparsers.get(command, parser)
    dests = {a.dest: a for a in target._actions}
    for key, raw in values.items():
        action = dests.get(key)
        if action is None:
            raise SystemExit(f"unknown config key {key!r} for {command}")
        value = action.type(raw) if action.type else raw
        target.set_defaults(**{key: value})
        if action.required:
            action.required = False
    return rest


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    parser.add_argument("--config", help="flat key = value file with option defaults")
    rest = _apply_config(parser, argv)
    args = parser.parse_args(rest)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
