"""Zero-mean Gaussian process with a squared-exponential kernel and a nugget.

The signal variance is integrated out analytically, leaving a posterior over
the log length-scales and one unconstrained nugget coordinate. Everything the
samplers need is exposed through :class:`IntegratedPosterior`, a callable that
maps an extended hyper-parameter vector to the negative log-posterior ``H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import expit

LOWER_BOUND = 1e-12
JITTER_LADDER = (1e-10, 1e-8, 1e-6)
EXPONENT_CONVENTIONS = ("n_minus_p", "n_minus_one")


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class FactorisationError(np.linalg.LinAlgError):
    """A matrix could not be Cholesky factorised, even after jitter."""


class EvaluationError(ArithmeticError):
    """The integrated posterior could not be evaluated at a point."""


class ConfigurationError(ValueError):
    """Invalid or unknown configuration value."""


@dataclass(frozen=True)
class TrainingSet:
    """Design matrix ``X`` (n x p) and outputs ``y`` (n,)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if X.shape[0] < 2:
            raise ValueError("at least two training runs are required")
        if X.shape[1] < 1:
            raise ValueError("inputs need at least one column")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("training data must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class HyperParamPoint:
    """Log length-scales plus the unconstrained nugget coordinate.

    Samplers work with the flat vector ``[log_phi..., z_delta]``; use
    :meth:`from_vector` and :meth:`as_vector` to move between the two.
    """

    log_phi: np.ndarray
    z_delta: float

    def __post_init__(self):
        log_phi = np.atleast_1d(np.asarray(self.log_phi, dtype=float))
        object.__setattr__(self, "log_phi", log_phi)
        object.__setattr__(self, "z_delta", float(self.z_delta))

    @classmethod
    def from_vector(cls, theta) -> "HyperParamPoint":
        theta = np.asarray(theta, dtype=float)
        return cls(theta[:-1], theta[-1])

    def as_vector(self) -> np.ndarray:
        return np.append(self.log_phi, self.z_delta)

    @property
    def phi(self) -> np.ndarray:
        return np.exp(self.log_phi)

    def nugget(self, lower_bound: float = LOWER_BOUND) -> float:
        return nugget_transform(self.z_delta, lower_bound)


@dataclass(frozen=True)
class KernelConfig:
    lower_bound: float = LOWER_BOUND
    jitter_max_attempts: int = len(JITTER_LADDER)
    exponent_convention: str = "n_minus_p"

    def __post_init__(self):
        if not 0.0 < self.lower_bound < 1.0:
            raise ConfigurationError("lower_bound must lie in (0, 1)")
        if self.exponent_convention not in EXPONENT_CONVENTIONS:
            raise ConfigurationError(
                f"unknown exponent convention {self.exponent_convention!r}"
            )
        if not 0 <= self.jitter_max_attempts <= len(JITTER_LADDER):
            raise ConfigurationError(
                f"jitter_max_attempts must be between 0 and {len(JITTER_LADDER)}"
            )

    def exponent(self, n: int, p: int) -> float:
        """Power applied to ``log sigma_hat^2`` in ``H``."""
        if self.exponent_convention == "n_minus_p":
            return 0.5 * (n - p)
        return 0.5 * (n - 1)


PRIOR_KINDS = ("uniform_log", "exponential", "custom")


@dataclass(frozen=True)
class PriorSpec:
    """Prior over the length-scales; the nugget always gets a flat prior on
    ``(lower_bound, 1)``.

    ``kind`` is one of ``"uniform_log"`` (flat on a box in log space),
    ``"exponential"`` (independent exponentials on ``phi`` with the given
    mean) or ``"custom"``, in which case ``log_density`` receives the
    ``log_phi`` vector and returns the log density in log space, Jacobian
    included.
    """

    kind: str = "uniform_log"
    low: float = -7.0
    high: float = 7.0
    mean: float = 5.0
    log_density: Optional[Callable[[np.ndarray], float]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ConfigurationError(f"unknown prior kind {self.kind!r}")
        if self.kind == "uniform_log" and not self.low < self.high:
            raise ConfigurationError("uniform_log prior needs low < high")
        if self.kind == "exponential" and not self.mean > 0:
            raise ConfigurationError("exponential prior needs a positive mean")
        if self.kind == "custom" and self.log_density is None:
            raise ConfigurationError("custom prior needs a log_density callable")

    def describe(self) -> dict:
        if self.kind == "uniform_log":
            return {"kind": self.kind, "low": self.low, "high": self.high}
        if self.kind == "exponential":
            return {"kind": self.kind, "mean": self.mean}
        return {"kind": self.kind}


def sq_exp_corr(x, x2, phi) -> float:
    """Squared-exponential correlation ``exp(-0.5 * sum((x - x2)**2 / phi))``."""
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0):
        raise DomainError("length-scales must be strictly positive")
    d = np.asarray(x, dtype=float) - np.asarray(x2, dtype=float)
    return float(np.exp(-0.5 * np.sum(d * d / phi)))


def cross_corr(A, B, phi) -> np.ndarray:
    """Correlation matrix between the rows of ``A`` and ``B``."""
    s = 1.0 / np.sqrt(np.asarray(phi, dtype=float))
    A = np.atleast_2d(A) * s
    B = np.atleast_2d(B) * s
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    return np.exp(-0.5 * np.maximum(d2, 0.0))


def nugget_transform(z_delta, lower_bound: float = LOWER_BOUND):
    """Map the unconstrained nugget coordinate into ``(lower_bound, 1)``."""
    return (1.0 - lower_bound) * expit(z_delta) + lower_bound


def nugget_inverse(nugget, lower_bound: float = LOWER_BOUND):
    """Inverse of :func:`nugget_transform`."""
    u = (np.asarray(nugget, dtype=float) - lower_bound) / (1.0 - lower_bound)
    return np.log(u) - np.log1p(-u)


def corr_matrix(ts: TrainingSet, hp: HyperParamPoint, cfg: KernelConfig = KernelConfig()):
    """Correlation matrix of the training inputs with the nugget on the diagonal."""
    phi = hp.phi
    if np.any(phi <= 0) or not np.all(np.isfinite(phi)):
        raise DomainError("length-scales must be finite and strictly positive")
    n = ts.n
    K = np.ones((n, n))
    iu = np.triu_indices(n, k=1)
    d = (ts.X[iu[0]] - ts.X[iu[1]]) ** 2
    K[iu] = np.exp(-0.5 * (d @ (1.0 / phi)))
    K.T[iu] = K[iu]
    K[np.diag_indices(n)] = 1.0 + hp.nugget(cfg.lower_bound)
    return K


def chol_logdet(K, jitter_max_attempts: int = 0):
    """Lower Cholesky factor of ``K`` and its log-determinant.

    If plain factorisation fails, up to ``jitter_max_attempts`` rungs of the
    jitter ladder are added to the diagonal before giving up. The returned
    factor is always that of the matrix actually factorised.
    """
    K = np.asarray(K, dtype=float)
    ladder = (0.0,) + JITTER_LADDER[:jitter_max_attempts]
    for jitter in ladder:
        A = K if jitter == 0.0 else K + jitter * np.eye(K.shape[0])
        try:
            L = np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            continue
        diag = np.diag(L)
        if np.all(diag > 0) and np.all(np.isfinite(diag)):
            return L, 2.0 * float(np.sum(np.log(diag)))
    raise FactorisationError("matrix is not positive definite")


def sigma_hat_sq(ts: TrainingSet, L) -> float:
    """Signal variance estimate ``y' K^-1 y / (n - 1)`` from a Cholesky factor."""
    v = solve_triangular(L, ts.y, lower=True)
    return float(v @ v) / (ts.n - 1)


def _log_nugget_jacobian(z_delta: float) -> float:
    # log d(nugget)/dz up to the constant log(1 - lower_bound)
    return -np.logaddexp(0.0, -z_delta) - np.logaddexp(0.0, z_delta)


def log_prior(hp: HyperParamPoint, prior: PriorSpec) -> float:
    """Log prior density in sampling coordinates, up to an additive constant.

    The flat nugget prior contributes only the Jacobian of the sigmoid map, so
    that it is flat in the nugget itself rather than in ``z_delta``.
    """
    log_phi = hp.log_phi
    if prior.kind == "uniform_log":
        if np.any(log_phi < prior.low) or np.any(log_phi > prior.high):
            return -math.inf
        lp = 0.0
    elif prior.kind == "exponential":
        lp = float(np.sum(-np.exp(log_phi) / prior.mean + log_phi))
    elif prior.kind == "custom":
        lp = float(prior.log_density(log_phi))
    else:
        raise ConfigurationError(f"unknown prior kind {prior.kind!r}")
    return lp + float(_log_nugget_jacobian(hp.z_delta))


@dataclass
class Factorisation:
    """Everything derived from one Cholesky factorisation of ``K_delta``."""

    L: np.ndarray
    logdet: float
    alpha: np.ndarray  # K_delta^-1 y
    sigma2: float
    nugget: float


def factorise(ts: TrainingSet, hp: HyperParamPoint, cfg: KernelConfig = KernelConfig()) -> Factorisation:
    K = corr_matrix(ts, hp, cfg)
    L, logdet = chol_logdet(K, cfg.jitter_max_attempts)
    alpha = cho_solve((L, True), ts.y)
    sigma2 = float(ts.y @ alpha) / (ts.n - 1)
    return Factorisation(L, logdet, alpha, sigma2, float(hp.nugget(cfg.lower_bound)))


def neg_log_integrated_posterior(
    hp: HyperParamPoint,
    ts: TrainingSet,
    prior: PriorSpec = PriorSpec(),
    cfg: KernelConfig = KernelConfig(),
) -> float:
    """``H = -log p(phi) + e * log(sigma_hat^2) + 0.5 * log|K_delta|``.

    Raises
    ------
    EvaluationError
        When ``K_delta`` cannot be factorised or ``sigma_hat^2`` is not
        positive.
    """
    lp = log_prior(hp, prior)
    if lp == -math.inf:
        return math.inf
    try:
        fac = factorise(ts, hp, cfg)
    except (FactorisationError, DomainError) as exc:
        raise EvaluationError(str(exc)) from exc
    if not fac.sigma2 > 0:
        raise EvaluationError("sigma_hat^2 is not positive")
    e = cfg.exponent(ts.n, ts.p)
    return -lp + e * math.log(fac.sigma2) + 0.5 * fac.logdet


class IntegratedPosterior:
    """Callable ``theta -> H(theta)`` over extended hyper-parameter vectors.

    Evaluation failures are mapped to ``+inf`` so that a failing point falls
    outside every slice.
    """

    def __init__(self, ts: TrainingSet, prior: PriorSpec = PriorSpec(), cfg: KernelConfig = KernelConfig()):
        self.ts = ts
        self.prior = prior
        self.cfg = cfg

    @property
    def dim(self) -> int:
        return self.ts.p + 1

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        if not np.all(np.isfinite(theta)):
            return math.inf
        try:
            value = neg_log_integrated_posterior(
                HyperParamPoint.from_vector(theta), self.ts, self.prior, self.cfg
            )
        except (EvaluationError, FloatingPointError, OverflowError):
            return math.inf
        return value if math.isfinite(value) else math.inf


def predictive_dof(ts: TrainingSet, cfg: KernelConfig = KernelConfig()) -> float:
    return 2.0 * cfg.exponent(ts.n, ts.p)


def predictive_moments(
    hp: HyperParamPoint,
    ts: TrainingSet,
    xq,
    cfg: KernelConfig = KernelConfig(),
    fac: Optional[Factorisation] = None,
):
    """Gaussian predictive mean and variance at one or more query points.

    The variance is that of the predictive Student-t (degrees of freedom
    ``2 * exponent``), so the Gaussian matches its first two moments.

    Returns ``(mu, s2)``: floats for a single query vector, arrays for a
    matrix of queries.
    """
    df = predictive_dof(ts, cfg)
    if df <= 2:
        raise DomainError(
            f"predictive variance undefined with {df:g} degrees of freedom"
        )
    if fac is None:
        fac = factorise(ts, hp, cfg)
    xq = np.asarray(xq, dtype=float)
    single = xq.ndim == 1
    Xq = np.atleast_2d(xq)
    T = cross_corr(Xq, ts.X, hp.phi)
    mu = T @ fac.alpha
    V = solve_triangular(fac.L, T.T, lower=True)
    corr = 1.0 + fac.nugget - np.sum(V * V, axis=0)
    s2 = np.maximum(fac.sigma2 * corr * df / (df - 2.0), 0.0)
    if single:
        return float(mu[0]), float(s2[0])
    return mu, s2


def predictive_cov(hp: HyperParamPoint, ts: TrainingSet, xa, xb, cfg: KernelConfig = KernelConfig(), fac=None) -> float:
    """Predictive covariance between two query points under one sample.

    The nugget is added only when the two points coincide.
    """
    df = predictive_dof(ts, cfg)
    if df <= 2:
        raise DomainError(
            f"predictive variance undefined with {df:g} degrees of freedom"
        )
    if fac is None:
        fac = factorise(ts, hp, cfg)
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    T = cross_corr(np.vstack([xa, xb]), ts.X, hp.phi)
    V = solve_triangular(fac.L, T.T, lower=True)
    corr = sq_exp_corr(xa, xb, hp.phi) - float(V[:, 0] @ V[:, 1])
    if np.array_equal(xa, xb):
        corr += fac.nugget
    return fac.sigma2 * corr * df / (df - 2.0)
