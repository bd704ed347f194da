"""Repeated emulation experiments: full-mixture versus MAP predictions, scored
by CRPS and RMSE on a held-out set."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .benchmarks import MODELS, lhs_design, simulate
from .gp import HyperParamPoint, TrainingSet
from .io import Dataset, ingest_csv, write_json, write_samples, write_table
from .scoring import (component_predictions, crps_gaussian, crps_mixture, map_estimate,
                      mixture_moments, predictive_mixtures, rmse)
from .tmcmc import RunConfig, RunReport, run_ta2s2

logger = logging.getLogger(__name__)


@dataclass
class ExperimentSpec:
    model: str = "franke"
    n_train: int = 20
    n_test: int = 100
    repeats: int = 1
    run: RunConfig = field(default_factory=RunConfig)
    output_dir: Optional[str] = None
    train_csv: Optional[str] = None
    test_csv: Optional[str] = None
    data_seed: int = 0
    scoring_size: int = 100

    def __post_init__(self):
        if self.model not in MODELS and self.model != "external_csv":
            raise ValueError(f"unknown model {self.model!r}")
        if self.model == "external_csv" and (self.train_csv is None or self.test_csv is None):
            raise ValueError("external_csv needs train_csv and test_csv")
        if self.n_train < 2:
            raise ValueError("n_train must be at least 2")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")

    def describe(self) -> dict:
        d = {
            "model": self.model,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "repeats": self.repeats,
            "data_seed": self.data_seed,
            "scoring_size": self.scoring_size,
            "run": self.run.describe(),
        }
        if self.model == "external_csv":
            d["train_csv"] = str(self.train_csv)
            d["test_csv"] = str(self.test_csv)
        return d


def make_dataset(spec: ExperimentSpec) -> Dataset:
    """Training and test sets: two independent LHS designs for the analytic
    models, or the given files. The same data is used by every repeat."""
    if spec.model == "external_csv":
        return ingest_csv(spec.train_csv, spec.test_csv)
    p = len(MODELS[spec.model][1])
    rng = np.random.default_rng([spec.data_seed, 0])
    Xtr = lhs_design(spec.n_train, p, rng)
    Xte = lhs_design(spec.n_test, p, rng)
    return Dataset(TrainingSet(Xtr, simulate(spec.model, Xtr)),
                   TrainingSet(Xte, simulate(spec.model, Xte)),
                   MODELS[spec.model][1])


def repeat_seed(seed: int, repeat: int) -> int:
    return int(np.random.SeedSequence([seed, repeat]).generate_state(1, np.uint64)[0])


def thin_stride(N: int, size: int) -> int:
    return max(1, N // size)


def score_samples(report: RunReport, data: Dataset, cfg: RunConfig):
    """Per-test-point CRPS and predictions for the thinned mixture and for
    the MAP sample."""
    train, test = data.train, data.test
    pts, _ = report.thinned()
    mixes = predictive_mixtures(pts, train, test.X, cfg=cfg.kernel)
    map_theta, _ = map_estimate(report.points, report.H)
    mu_map, s2_map, _ = component_predictions(map_theta[None, :], train, test.X, cfg.kernel)
    mu_map, s2_map = mu_map[0], s2_map[0]

    moments = np.array([mixture_moments(m) for m in mixes])
    crps_mix = np.array([crps_mixture(m, y) for m, y in zip(mixes, test.y)])
    crps_map = np.array([crps_gaussian(m, s, y) for m, s, y in zip(mu_map, s2_map, test.y)])
    return {
        "mu_mixture": moments[:, 0],
        "s2_mixture": moments[:, 1],
        "mu_map": mu_map,
        "s2_map": s2_map,
        "crps_mixture": crps_mix,
        "crps_map": crps_map,
        "rmse_mixture": rmse(moments[:, 0], test.y),
        "rmse_map": rmse(mu_map, test.y),
        "map": map_theta,
    }


def samples_summary(report: RunReport, cfg: RunConfig) -> dict:
    pts, _ = report.thinned()
    i = report.map_index()
    hp = HyperParamPoint.from_vector(report.points[i])
    return {
        "n_samples": len(report.H),
        "n_thinned": len(pts),
        "mean": report.points.mean(axis=0),
        "std": report.points.std(axis=0),
        "map": {
            "log_phi": hp.log_phi,
            "z_delta": hp.z_delta,
            "nugget": hp.nugget(cfg.kernel.lower_bound),
            "H": float(report.H[i]),
        },
    }


def run_repeat(spec: ExperimentSpec, data: Dataset, repeat: int) -> dict:
    cfg = replace(spec.run, seed=repeat_seed(spec.run.seed, repeat),
                  thin=thin_stride(spec.run.N, spec.scoring_size))
    t0 = time.perf_counter()
    report = run_ta2s2(data.train, cfg)
    t1 = time.perf_counter()
    scores = score_samples(report, data, cfg)
    t2 = time.perf_counter()
    return {
        "repeat": repeat,
        "status": "ok",
        "error": None,
        "seed": cfg.seed,
        "ladder": report.ladder,
        "levels": [
            {"tau": s.tau, "ess": s.ess, "chains": s.chains, "crumbs": s.crumbs, "stalls": s.stalls}
            for s in report.levels
        ],
        "samples_summary": samples_summary(report, cfg),
        "crps": {"mixture": scores["crps_mixture"], "map": scores["crps_map"]},
        "rmse": {"mixture": scores["rmse_mixture"], "map": scores["rmse_map"]},
        "timings": {"sampling": t1 - t0, "scoring": t2 - t1},
        "_report": report,
        "_scores": scores,
    }


def _failed_repeat(repeat: int, seed: int, exc: Exception) -> dict:
    return {
        "repeat": repeat,
        "status": "failed",
        "error": f"{type(exc).__name__}: {exc}",
        "seed": seed,
        "ladder": [],
        "levels": [],
        "samples_summary": None,
        "crps": {"mixture": [], "map": []},
        "rmse": {"mixture": None, "map": None},
        "timings": {},
    }


def run_experiment(spec: ExperimentSpec) -> dict:
    """Run every repeat, write reports under ``spec.output_dir`` if set, and
    return the experiment summary.

    A failing repeat is recorded with its reason and the others still run.
    """
    data = make_dataset(spec)
    out = Path(spec.output_dir) if spec.output_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    repeats = []
    plot_rows = []
    for r in range(spec.repeats):
        try:
            res = run_repeat(spec, data, r)
        except Exception as exc:  # recorded, experiment continues
            logger.warning("repeat %d failed: %s", r, exc)
            res = _failed_repeat(r, repeat_seed(spec.run.seed, r), exc)
        report = res.pop("_report", None)
        scores = res.pop("_scores", None)
        repeats.append(res)
        if res["status"] == "ok":
            for method in ("mixture", "map"):
                plot_rows += [(method, r, i, float(c)) for i, c in enumerate(res["crps"][method])]
        if out is not None:
            _write_repeat(out / f"repeat_{r:03d}", spec, data, res, report, scores)

    ok = [r for r in repeats if r["status"] == "ok"]
    summary = {
        "config": spec.describe(),
        "repeats": [
            {k: r[k] for k in ("repeat", "status", "error", "seed")}
            | {
                "levels": len(r["ladder"]),
                "mean_crps": {m: (float(np.mean(r["crps"][m])) if len(r["crps"][m]) else None)
                              for m in ("mixture", "map")},
                "rmse": r["rmse"],
            }
            for r in repeats
        ],
        "mixture_wins": sum(bool(np.mean(r["crps"]["mixture"]) <= np.mean(r["crps"]["map"])) for r in ok),
        "completed": len(ok),
    }
    if out is not None:
        write_table(out / "crps.csv", ["method", "repeat", "test_index", "crps"], plot_rows)
        write_json(out / "experiment.json", summary)
    summary["results"] = repeats
    return summary


def _write_repeat(path: Path, spec, data, res, report, scores):
    path.mkdir(parents=True, exist_ok=True)
    doc = {"config": spec.describe()}
    doc.update({k: v for k, v in res.items() if k != "levels"})
    doc["levels"] = res["levels"]
    write_json(path / "report.json", doc)
    if report is None:
        return
    write_samples(path / "samples.csv", report.points, report.H)
    test = data.test
    p = test.X.shape[1]
    header = ["test_index"] + [f"x{i + 1}" for i in range(p)] + [
        "y", "mu_mixture", "s2_mixture", "mu_map", "s2_map", "crps_mixture", "crps_map"]
    rows = []
    for i in range(len(test.y)):
        rows.append([i] + [float(v) for v in test.X[i]] + [
            float(test.y[i]), float(scores["mu_mixture"][i]), float(scores["s2_mixture"][i]),
            float(scores["mu_map"][i]), float(scores["s2_map"][i]),
            float(scores["crps_mixture"][i]), float(scores["crps_map"][i])])
    write_table(path / "points.csv", header, rows)
