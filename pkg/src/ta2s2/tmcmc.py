"""Transitional driver: annealing ladder, chain allocation and parallel chains.

Each level reweights the previous sample towards the next temperature,
resamples chain seeds systematically, then grows one chain per surviving seed
with as many slice steps as the seed's multiplicity. Every chain draws from its
own random stream derived from ``(seed, level, chain index)``, so results do
not depend on how chains are spread over workers.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .annealing import TemperatureLadder, WeightedSampleSet
from .gp import IntegratedPosterior, KernelConfig, PriorSpec, TrainingSet, nugget_inverse
from .slice import DEFAULT_MAX_CRUMBS, DEFAULT_P_RENEW, LevelContext, SliceState, advance_chain

logger = logging.getLogger(__name__)

_CHAIN, _RESAMPLE, _INIT = 0, 1, 2


class InitialisationError(RuntimeError):
    """Not enough points with finite ``H`` could be drawn for level 0."""


class LevelError(RuntimeError):
    """Too many chains stalled within a level."""


@dataclass
class RunConfig:
    N: int = 500
    gamma: float = 0.5
    c0: Optional[float] = None
    p_renew: float = DEFAULT_P_RENEW
    max_crumbs: int = DEFAULT_MAX_CRUMBS
    max_levels: int = 50
    prior: PriorSpec = field(default_factory=PriorSpec)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    seed: int = 0
    workers: int = 1
    thin: int = 1
    init_low: float = -7.0
    init_high: float = 7.0
    max_stall_rate: float = 0.5

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not self.init_low < self.init_high:
            raise ValueError("init box must have init_low < init_high")

    def describe(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("prior", "kernel", "workers")}
        d["prior"] = self.prior.describe()
        d["kernel"] = asdict(self.kernel)
        return d


def stream(seed: int, level: int, kind: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one (level, purpose, index) slot."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, level, kind, index])


@dataclass
class LevelStats:
    level: int
    tau: float
    ess: float
    chains: int
    crumbs: int
    stalls: int
    seconds: float


@dataclass
class RunReport:
    taus: list
    ess: list
    levels: list
    points: np.ndarray
    H: np.ndarray
    thin: int = 1
    seconds: float = 0.0

    @property
    def ladder(self) -> list:
        """Finite temperatures with the ESS realised when moving to each."""
        return [{"tau": t, "ess": e} for t, e in zip(self.taus[1:], self.ess[1:])]

    def thinned(self):
        return self.points[:: self.thin], self.H[:: self.thin]

    def map_index(self) -> int:
        return int(np.argmin(self.H))


def uniform_box(low, high, dim: int) -> Callable:
    """Initial-sample generator uniform on ``[low, high]^dim``."""

    def draw(rng, size):
        return rng.uniform(low, high, size=(size, dim))

    return draw


def gp_box(p: int, low: float = -7.0, high: float = 7.0, lower_bound: float = 1e-12) -> Callable:
    """Log length-scales uniform on ``[low, high]^p``; nugget uniform on
    ``(lower_bound, 1)`` mapped back to its unconstrained coordinate."""

    def draw(rng, size):
        log_phi = rng.uniform(low, high, size=(size, p))
        u = rng.uniform(0.0, 1.0, size=size)
        u = np.clip(u, 1e-300, None)
        z = nugget_inverse(lower_bound + (1.0 - lower_bound) * u, lower_bound)
        return np.column_stack([log_phi, z])

    return draw


def initial_sample(H: Callable, draw: Callable, N: int, rng, max_attempts: Optional[int] = None) -> WeightedSampleSet:
    """``N`` points from ``draw`` with finite ``H``, equally weighted."""
    if max_attempts is None:
        max_attempts = 100 * N
    points, values = [], []
    attempts = 0
    while len(points) < N:
        if attempts >= max_attempts:
            raise InitialisationError(
                f"found only {len(points)} of {N} finite-H points in {attempts} draws"
            )
        batch = draw(rng, min(N - len(points), max_attempts - attempts))
        attempts += len(batch)
        for x in batch:
            h = H(x)
            if math.isfinite(h):
                points.append(x)
                values.append(h)
    return WeightedSampleSet.uniform(np.array(points), np.array(values))


def allocate_chains(weights, N: int, rng, offset: Optional[float] = None) -> np.ndarray:
    """Systematic resampling: number of next-level draws per seed.

    Returns an integer array of multiplicities summing to ``N``. ``offset``
    in ``[0, 1)`` fixes the single uniform draw.
    """
    w = np.asarray(weights, dtype=float)
    if offset is None:
        offset = rng.random()
    positions = (offset + np.arange(N)) / N
    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, positions, side="right")
    return np.bincount(np.minimum(idx, len(w) - 1), minlength=len(w))


def _grow_chain(ctx, start, H_start, length, H, rng):
    out = np.empty((length, ctx.dim))
    out_H = np.empty(length)
    state = SliceState(np.asarray(start, dtype=float), float(H_start))
    crumbs = stalls = 0
    for i in range(length):
        step = advance_chain(ctx, state, H, rng)
        state = step.state
        crumbs += step.crumbs
        stalls += step.stalled
        out[i] = state.current
        out_H[i] = state.H
    return out, out_H, crumbs, stalls


def run_level(level: int, prev: WeightedSampleSet, tau: float, H: Callable, cfg: RunConfig,
              sigma=None, executor=None):
    """Grow the next level's ``N`` samples from the reweighted ``prev``.

    Returns the new equally weighted sample and the level's :class:`LevelStats`
    (ESS left as NaN for the caller to fill).
    """
    t0 = time.perf_counter()
    if sigma is None:
        sigma = prev.covariance()
    counts = allocate_chains(prev.weights, cfg.N, stream(cfg.seed, level, _RESAMPLE))
    ctx = LevelContext(prev.points, prev.H, tau, sigma, cfg.c0, cfg.p_renew, cfg.max_crumbs)
    seeds = np.flatnonzero(counts)

    def job(j):
        return _grow_chain(ctx, prev.points[j], prev.H[j], int(counts[j]), H,
                           stream(cfg.seed, level, _CHAIN, int(j)))

    if executor is None:
        results = [job(j) for j in seeds]
    else:
        results = list(executor.map(job, seeds))

    points = np.concatenate([r[0] for r in results])
    values = np.concatenate([r[1] for r in results])
    crumbs = sum(r[2] for r in results)
    stalls = sum(r[3] for r in results)
    stats = LevelStats(level, tau, math.nan, len(seeds), int(crumbs), int(stalls),
                       time.perf_counter() - t0)
    if stalls > cfg.max_stall_rate * cfg.N:
        raise LevelError(
            f"level {level}: {stalls} of {cfg.N} steps stalled at tau={tau:.6g}"
        )
    return WeightedSampleSet.uniform(points, values), stats


def ta2s2(H: Callable, draw: Callable, cfg: RunConfig) -> RunReport:
    """Sample ``exp(-H)`` by annealing from a flat start down to ``tau = 1``.

    Parameters
    ----------
    H : callable
        Negative log target on flat vectors; ``inf`` marks excluded points.
    draw : callable
        ``draw(rng, size)`` returning initial candidates, e.g. from
        :func:`uniform_box` or :func:`gp_box`.
    cfg : RunConfig
    """
    t_start = time.perf_counter()
    sample = initial_sample(H, draw, cfg.N, stream(cfg.seed, 0, _INIT))
    ladder = TemperatureLadder(cfg.gamma, cfg.max_levels)
    levels = []
    executor = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while not ladder.done:
            tau_prev = ladder.current
            tau = ladder.advance(sample.H)
            k = ladder.levels
            # first level spreads with the flat initial covariance
            sigma = sample.covariance() if k == 1 else None
            prev = sample.reweighted(tau_prev, tau)
            sample, stats = run_level(k, prev, tau, H, cfg, sigma=sigma, executor=executor)
            stats.ess = ladder.ess[-1]
            levels.append(stats)
            logger.info("level %d: tau=%.6g ess=%.1f crumbs/step=%.2f stalls=%d",
                        k, tau, stats.ess, stats.crumbs / cfg.N, stats.stalls)
    finally:
        if executor is not None:
            executor.shutdown()
    return RunReport(list(ladder.taus), list(ladder.ess), levels, sample.points, sample.H,
                     cfg.thin, time.perf_counter() - t_start)


def run_ta2s2(ts: TrainingSet, cfg: RunConfig) -> RunReport:
    """Sample GP hyper-parameters ``[log_phi..., z_delta]`` for ``ts``."""
    H = IntegratedPosterior(ts, cfg.prior, cfg.kernel)
    draw = gp_box(ts.p, cfg.init_low, cfg.init_high, cfg.kernel.lower_bound)
    return ta2s2(H, draw, cfg)
