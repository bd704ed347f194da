"""Importance weights between tempered targets and ESS-driven temperature choice.

Level ``k`` targets ``exp(-H / tau_k)``. Temperatures are handled internally
through inverse temperatures ``beta = 1 / tau`` so that the initial flat level
(``tau = inf``) is simply ``beta = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp


class DegenerateWeightsError(ArithmeticError):
    """Every sample has zero importance weight."""


class LadderCapError(RuntimeError):
    """The temperature ladder did not reach 1 within ``max_levels``."""


def _inverse(tau: float) -> float:
    return 0.0 if math.isinf(tau) else 1.0 / tau


def _log_weights(H, dbeta: float) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    logw = np.full(H.shape, -np.inf)
    finite = np.isfinite(H)
    logw[finite] = -dbeta * H[finite]
    return logw


def _normalise(logw) -> np.ndarray:
    if not np.any(np.isfinite(logw)):
        raise DegenerateWeightsError("all importance weights are zero")
    w = np.exp(logw - np.max(logw))
    return w / np.sum(w)


@dataclass
class WeightedSampleSet:
    """Samples with cached ``H`` values and their importance weights."""

    points: np.ndarray
    H: np.ndarray
    raw_weights: np.ndarray
    weights: np.ndarray

    @classmethod
    def uniform(cls, points, H) -> "WeightedSampleSet":
        n = len(H)
        return cls(np.asarray(points, dtype=float), np.asarray(H, dtype=float),
                   np.ones(n), np.full(n, 1.0 / n))

    def __len__(self):
        return len(self.H)

    def reweighted(self, tau_prev: float, tau_next: float) -> "WeightedSampleSet":
        w = importance_weights(self.H, tau_prev, tau_next)
        return WeightedSampleSet(self.points, self.H, w.raw_weights, w.weights)

    def covariance(self) -> np.ndarray:
        """Weighted sample covariance (biased, weights sum to one)."""
        X = np.asarray(self.points, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        mean = self.weights @ X
        D = X - mean
        return (D * self.weights[:, None]).T @ D


def importance_weights(H, tau_prev: float, tau_next: float) -> WeightedSampleSet:
    """Weights ``exp(-H (1/tau_next - 1/tau_prev))`` and their normalisation.

    Raw weights are returned max-shifted (largest equals one), so only their
    ratios are meaningful. Samples with infinite ``H`` get zero weight.
    """
    H = np.asarray(H, dtype=float)
    dbeta = _inverse(tau_next) - _inverse(tau_prev)
    logw = _log_weights(H, dbeta)
    weights = _normalise(logw)
    raw = np.exp(logw - np.max(logw))
    return WeightedSampleSet(np.empty((len(H), 0)), H, raw, weights)


def effective_sample_size(weights) -> float:
    """``1 / sum(w**2)`` for normalised weights."""
    w = np.asarray(weights, dtype=float)
    return float(1.0 / np.sum(w * w))


def _log_ess(H, dbeta: float) -> float:
    logw = _log_weights(H, dbeta)
    return float(2.0 * logsumexp(logw) - logsumexp(2.0 * logw))


def next_temperature(H, tau_prev: float, gamma: float = 0.5, N=None, *, tol: float = 1e-9,
                     max_iter: int = 200) -> float:
    """Temperature at which the reweighted sample has ESS ``gamma * N``.

    Bisection on the inverse temperature in ``(1/tau_prev, 1]``. Returns
    exactly 1 when the ESS at ``tau = 1`` already meets the target. The
    bisection stops once the ESS is within relative ``tol`` of the target or
    the bracket has collapsed to machine precision.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    H = np.asarray(H, dtype=float)
    if N is None:
        N = len(H)
    if not np.any(np.isfinite(H)):
        raise DegenerateWeightsError("all importance weights are zero")
    beta_prev = _inverse(tau_prev)
    if beta_prev >= 1.0:
        raise ValueError("previous temperature must exceed 1")
    log_target = math.log(gamma * N)
    if _log_ess(H, 1.0 - beta_prev) >= log_target:
        return 1.0

    lo, hi = 0.0, 1.0 - beta_prev  # ESS(lo) >= target > ESS(hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f = _log_ess(H, mid) - log_target
        if abs(f) <= tol:
            lo = hi = mid
            break
        if f > 0:
            lo = mid
        else:
            hi = mid
    # lo keeps the ESS at or above target; it is only zero for a degenerate bracket
    dbeta = lo if lo > 0.0 else hi
    return 1.0 / (beta_prev + dbeta)


@dataclass
class TemperatureLadder:
    """Temperatures in decreasing order, starting from the flat sentinel."""

    gamma: float = 0.5
    max_levels: int = 50
    taus: list = field(default_factory=lambda: [math.inf])
    ess: list = field(default_factory=lambda: [math.nan])

    @property
    def current(self) -> float:
        return self.taus[-1]

    @property
    def done(self) -> bool:
        return self.taus[-1] == 1.0

    @property
    def levels(self) -> int:
        return len(self.taus) - 1

    def advance(self, H) -> float:
        """Choose and record the next temperature from the current sample."""
        if self.done:
            raise RuntimeError("ladder already terminated at tau = 1")
        if self.levels >= self.max_levels:
            raise LadderCapError(
                f"temperature did not reach 1 within {self.max_levels} levels"
            )
        tau = next_temperature(H, self.current, self.gamma)
        if not tau < self.current:
            raise RuntimeError("temperature ladder failed to decrease")
        w = importance_weights(H, self.current, tau)
        self.taus.append(tau)
        self.ess.append(effective_sample_size(w.weights))
        return tau
