"""Annealed adaptive slice sampling step with marker crumbs.

Slices are built on the negative log target ``H``: the slice around the
current state ``x0`` at temperature ``tau`` is ``{x : z > H(x)}`` with
``z = H(x0) + Exponential(mean=tau)``. Candidates are drawn from Gaussians
centred between the current state and the running mean of the crumbs, with a
spread that shrinks as ``c0 / l`` after ``l`` crumbs. Crumbs are previous-level
samples (markers) that already lie inside the slice, or Gaussian draws around
the current state (renewal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

DEFAULT_P_RENEW = 0.1
DEFAULT_MAX_CRUMBS = 100


def default_spread(dim: int) -> float:
    return 2.38 / math.sqrt(dim)


def regularised_sqrt(cov) -> np.ndarray:
    """Lower factor ``A`` with ``A A' ~= cov``.

    A small ridge proportional to the mean variance is added first; if the
    matrix still cannot be factorised only its diagonal is used.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    dim = cov.shape[0]
    ridge = 1e-8 * np.trace(cov) / dim
    if not ridge > 0:
        ridge = 1e-8
    try:
        return np.linalg.cholesky(cov + ridge * np.eye(dim))
    except np.linalg.LinAlgError:
        return np.diag(np.sqrt(np.maximum(np.diag(cov), 0.0) + ridge))


@dataclass
class LevelContext:
    """Read-only state shared by every chain within one annealing level."""

    markers: np.ndarray
    marker_H: np.ndarray
    tau: float
    sigma: np.ndarray
    c0: Optional[float] = None
    p_renew: float = DEFAULT_P_RENEW
    max_crumbs: int = DEFAULT_MAX_CRUMBS
    chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        markers = np.asarray(self.markers, dtype=float)
        self.markers = markers.reshape(len(markers), -1)
        self.marker_H = np.asarray(self.marker_H, dtype=float)
        if len(self.marker_H) == 0:
            raise ValueError("at least one marker is required")
        if not self.tau >= 1.0:
            raise ValueError("temperature must be at least 1")
        if not 0.0 <= self.p_renew <= 1.0:
            raise ValueError("p_renew must be a probability")
        if self.max_crumbs < 1:
            raise ValueError("max_crumbs must be positive")
        self.sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if self.c0 is None:
            self.c0 = default_spread(self.dim)
        self.chol = regularised_sqrt(self.sigma)

    @property
    def dim(self) -> int:
        return self.markers.shape[1]

    def gaussian(self, centre, scale: float, rng) -> np.ndarray:
        return centre + scale * (self.chol @ rng.standard_normal(self.dim))


@dataclass
class SliceState:
    current: np.ndarray
    H: float
    z: float = math.nan


@dataclass
class StepResult:
    state: SliceState
    crumbs: int
    stalled: bool


def draw_slice_level(H_current: float, tau: float, rng, e: Optional[float] = None) -> float:
    """Slice height ``H_current + e`` with ``e ~ Exponential(mean=tau)``.

    Pass ``e`` to inject the exponential draw.
    """
    if e is None:
        e = rng.exponential(tau)
    return H_current + e


def in_slice(H_candidate: float, z: float) -> bool:
    return z > H_candidate


def marker_index_set(marker_H, z: float) -> np.ndarray:
    """Indices of the markers inside the slice ``{H < z}``."""
    return np.flatnonzero(np.asarray(marker_H) < z)


def draw_crumb(ctx: LevelContext, current, J, rng, index: Optional[int] = None) -> np.ndarray:
    """Pick a marker from ``J`` or, if ``J`` is empty or with probability
    ``p_renew``, renew around the current state with covariance
    ``c0^2 Sigma``. ``index`` forces the marker choice (position within ``J``).
    """
    if len(J) == 0 or rng.random() < ctx.p_renew:
        return ctx.gaussian(np.asarray(current, dtype=float), ctx.c0, rng)
    if index is None:
        index = rng.integers(len(J))
    return ctx.markers[J[index]].copy()


def candidate_centre(current, crumb_mean, l: int) -> np.ndarray:
    alpha = 1.0 - 1.0 / l
    return alpha * np.asarray(current, dtype=float) + (1.0 - alpha) * np.asarray(crumb_mean)


def propose_candidate(ctx: LevelContext, current, crumbs, rng) -> np.ndarray:
    """Gaussian candidate after ``l = len(crumbs)`` crumbs.

    Centre ``alpha_l x0 + (1 - alpha_l) mean(crumbs)`` with
    ``alpha_l = 1 - 1/l``; covariance ``(c0 / l)^2 Sigma``.
    """
    l = len(crumbs)
    if l < 1:
        raise ValueError("need at least one crumb")
    centre = candidate_centre(current, np.mean(crumbs, axis=0), l)
    return ctx.gaussian(centre, ctx.c0 / l, rng)


def advance_chain(ctx: LevelContext, state: SliceState, H: Callable, rng) -> StepResult:
    """One slice step: new slice height, then crumbs until a candidate lands
    inside the slice.

    If ``max_crumbs`` candidates are rejected the current state is returned
    with ``stalled=True``.
    """
    x0 = np.asarray(state.current, dtype=float)
    z = draw_slice_level(state.H, ctx.tau, rng)
    J = marker_index_set(ctx.marker_H, z)
    crumb_sum = np.zeros(ctx.dim)
    for l in range(1, ctx.max_crumbs + 1):
        crumb_sum += draw_crumb(ctx, x0, J, rng)
        centre = candidate_centre(x0, crumb_sum / l, l)
        xi = ctx.gaussian(centre, ctx.c0 / l, rng)
        h = H(xi)
        if in_slice(h, z):
            return StepResult(SliceState(xi, float(h), z), l, False)
    return StepResult(SliceState(x0, state.H, z), ctx.max_crumbs, True)
