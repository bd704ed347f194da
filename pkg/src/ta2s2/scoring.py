"""Gaussian-mixture predictions from hyper-parameter samples, and their scores."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .gp import (HyperParamPoint, KernelConfig, TrainingSet, factorise,
                 predictive_cov, predictive_moments)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass
class PredictiveMixture:
    """Weighted Gaussian components at one query point."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        self.means = np.atleast_1d(np.asarray(self.means, dtype=float))
        self.variances = np.atleast_1d(np.asarray(self.variances, dtype=float))
        if not (len(self.weights) == len(self.means) == len(self.variances)):
            raise ValueError("weights, means and variances must have equal length")
        if np.any(self.variances < 0):
            raise ValueError("component variances must be non-negative")
        if abs(np.sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to one")

    @classmethod
    def equal(cls, means, variances) -> "PredictiveMixture":
        means = np.atleast_1d(means)
        return cls(np.full(len(means), 1.0 / len(means)), means, variances)


def mixture_moments(mix: PredictiveMixture):
    """Mean and total variance (within plus between components)."""
    w, mu, s2 = mix.weights, mix.means, mix.variances
    m = float(w @ mu)
    return m, float(w @ ((mu - m) ** 2 + s2))


def mixture_cov(weights, means_a, means_b, cross_cov) -> float:
    """Mixture covariance between two query points.

    ``means_a[i]``, ``means_b[i]`` and ``cross_cov[i]`` are the predictive
    means and covariance under sample ``i`` at the two points.
    """
    w = np.asarray(weights, dtype=float)
    ma = np.asarray(means_a, dtype=float)
    mb = np.asarray(means_b, dtype=float)
    return float(w @ ((ma - w @ ma) * (mb - w @ mb) + np.asarray(cross_cov, dtype=float)))


def crps_A(mu, sigma2):
    """``2 s f(mu/s) + mu (2 F(mu/s) - 1)`` with ``s = sqrt(sigma2)``;
    ``|mu|`` when ``sigma2 == 0``. Broadcasts over arrays."""
    mu = np.asarray(mu, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    s = np.sqrt(sigma2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = mu / s
        val = 2.0 * s * np.exp(-0.5 * r * r) / _SQRT_2PI + mu * (2.0 * ndtr(r) - 1.0)
    val = np.where(sigma2 > 0, val, np.abs(mu))
    return float(val) if val.ndim == 0 else val


def crps_mixture(mix: PredictiveMixture, x: float) -> float:
    """Closed-form CRPS of a Gaussian mixture at the observation ``x``."""
    w, mu, s2 = mix.weights, mix.means, mix.variances
    first = float(w @ crps_A(x - mu, s2))
    iu = np.triu_indices(len(w), k=1)
    off = w[iu[0]] * w[iu[1]] * crps_A(mu[iu[0]] - mu[iu[1]], s2[iu[0]] + s2[iu[1]])
    diag = w * w * crps_A(np.zeros_like(mu), 2.0 * s2)
    second = 2.0 * float(np.sum(off)) + float(np.sum(diag))
    return max(first - 0.5 * second, 0.0)


def crps_gaussian(mu: float, s2: float, x: float) -> float:
    return crps_mixture(PredictiveMixture([1.0], [mu], [s2]), x)


def map_estimate(points, H):
    """Sample with the smallest ``H`` (first one on ties) and its index."""
    H = np.asarray(H, dtype=float)
    if H.size == 0:
        raise ValueError("cannot take the MAP of an empty sample")
    i = int(np.argmin(H))
    return np.asarray(points)[i], i


def rmse(predictions, truths) -> float:
    predictions = np.asarray(predictions, dtype=float)
    truths = np.asarray(truths, dtype=float)
    if predictions.shape != truths.shape:
        raise ValueError(f"shape mismatch: {predictions.shape} vs {truths.shape}")
    if predictions.size == 0:
        raise ValueError("need at least one prediction")
    return float(np.sqrt(np.mean((predictions - truths) ** 2)))


def component_predictions(samples, ts: TrainingSet, Xq, cfg: KernelConfig = KernelConfig()):
    """Per-sample predictive means and variances, shape ``(n_samples, n_query)``.

    Samples whose correlation matrix cannot be factorised are dropped; the
    indices of those kept are returned as the third element.
    """
    samples = np.atleast_2d(samples)
    Xq = np.atleast_2d(Xq)
    means, variances, kept = [], [], []
    for i, theta in enumerate(samples):
        hp = HyperParamPoint.from_vector(theta)
        try:
            fac = factorise(ts, hp, cfg)
        except np.linalg.LinAlgError:
            continue
        mu, s2 = predictive_moments(hp, ts, Xq, cfg, fac=fac)
        means.append(mu)
        variances.append(s2)
        kept.append(i)
    if not kept:
        raise ValueError("no sample could be used for prediction")
    return np.array(means), np.array(variances), np.array(kept)


def predictive_mixtures(samples, ts: TrainingSet, Xq, weights=None, cfg: KernelConfig = KernelConfig()):
    """One :class:`PredictiveMixture` per query row."""
    means, variances, kept = component_predictions(samples, ts, Xq, cfg)
    if weights is None:
        w = np.full(len(kept), 1.0 / len(kept))
    else:
        w = np.asarray(weights, dtype=float)[kept]
        w = w / w.sum()
    return [PredictiveMixture(w, means[:, j], variances[:, j]) for j in range(means.shape[1])]


def mixture_cov_at(samples, ts: TrainingSet, xa, xb, weights=None, cfg: KernelConfig = KernelConfig()) -> float:
    """Mixture predictive covariance between two query points."""
    samples = np.atleast_2d(samples)
    ma, mb, cc = [], [], []
    for theta in samples:
        hp = HyperParamPoint.from_vector(theta)
        fac = factorise(ts, hp, cfg)
        ma.append(predictive_moments(hp, ts, xa, cfg, fac=fac)[0])
        mb.append(predictive_moments(hp, ts, xb, cfg, fac=fac)[0])
        cc.append(predictive_cov(hp, ts, xa, xb, cfg, fac=fac))
    if weights is None:
        weights = np.full(len(samples), 1.0 / len(samples))
    return mixture_cov(weights, ma, mb, cc)
