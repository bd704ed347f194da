"""Analytic test simulators and space-filling designs."""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc

from .gp import DomainError

# (name, lower, upper); sweep angle in degrees
WING_INPUTS = (
    ("S_w", 150.0, 200.0),
    ("W_fw", 220.0, 300.0),
    ("A", 6.0, 10.0),
    ("Lambda", -10.0, 10.0),
    ("q", 16.0, 45.0),
    ("lambda", 0.5, 1.0),
    ("t_c", 0.08, 0.18),
    ("N_z", 2.5, 6.0),
    ("W_dg", 1700.0, 2500.0),
    ("W_p", 0.025, 0.08),
)
WING_BOUNDS = np.array([(lo, hi) for _, lo, hi in WING_INPUTS])
FRANKE_BOUNDS = np.array([(0.0, 1.0), (0.0, 1.0)])


def franke(x) -> float:
    """Franke's two-peak, one-dip surface on the unit square.

    The second term's exponent in ``x2`` is linear, ``(9 x2 + 1) / 10``,
    rather than the squared form found in most other sources.
    """
    x1, x2 = np.asarray(x, dtype=float)[..., 0], np.asarray(x, dtype=float)[..., 1]
    a, b = 9.0 * x1, 9.0 * x2
    f = (
        0.75 * np.exp(-((a - 2) ** 2) / 4 - (b - 2) ** 2 / 4)
        + 0.75 * np.exp(-((a + 1) ** 2) / 49 - (b + 1) / 10)
        + 0.5 * np.exp(-((a - 7) ** 2) / 4 - (b - 3) ** 2 / 4)
        - 0.2 * np.exp(-((a - 4) ** 2) - (b - 7) ** 2)
    )
    return float(f) if np.ndim(f) == 0 else f


def wing_weight(x, check: bool = True):
    """Light-aircraft wing weight; inputs in natural units, sweep in degrees.

    Accepts one input vector of length 10 or a matrix of them.
    """
    X = np.asarray(x, dtype=float)
    if X.shape[-1] != 10:
        raise DomainError("wing weight takes 10 inputs")
    if check:
        tol = 1e-9 * (WING_BOUNDS[:, 1] - WING_BOUNDS[:, 0])
        if np.any(X < WING_BOUNDS[:, 0] - tol) or np.any(X > WING_BOUNDS[:, 1] + tol):
            raise DomainError("wing weight input outside its admissible range")
    Sw, Wfw, A, sweep, q, taper, tc, Nz, Wdg, Wp = np.moveaxis(X, -1, 0)
    c = np.cos(np.deg2rad(sweep))
    f = (
        0.036 * Sw**0.758 * Wfw**0.0035 * (A / c**2) ** 0.6 * q**0.006 * taper**0.04
        * (100.0 * tc / c) ** -0.3 * (Nz * Wdg) ** 0.49
        + Sw * Wp
    )
    return float(f) if np.ndim(f) == 0 else f


def lhs_design(n: int, p: int, rng) -> np.ndarray:
    """Latin hypercube of ``n`` points in ``[0, 1)^p``: one point per stratum
    and column, uniformly jittered, columns permuted independently."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    return qmc.LatinHypercube(d=p, scramble=True, rng=rng).random(n)


def rescale_to_unit(X, bounds) -> np.ndarray:
    """Affine map of each column from ``[lower, upper]`` onto ``[0, 1]``."""
    lo, hi = _check_bounds(bounds)
    return (np.asarray(X, dtype=float) - lo) / (hi - lo)


def rescale_from_unit(U, bounds) -> np.ndarray:
    lo, hi = _check_bounds(bounds)
    return lo + np.asarray(U, dtype=float) * (hi - lo)


def _check_bounds(bounds):
    b = np.asarray(bounds, dtype=float)
    if b.ndim != 2 or b.shape[1] != 2 or not np.all(np.isfinite(b)):
        raise ValueError("bounds must be finite (lower, upper) pairs")
    if np.any(b[:, 0] >= b[:, 1]):
        raise ValueError("each lower bound must be below its upper bound")
    return b[:, 0], b[:, 1]


MODELS = {
    "franke": (franke, FRANKE_BOUNDS),
    "wing_weight": (wing_weight, WING_BOUNDS),
}


def simulate(model: str, U) -> np.ndarray:
    """Evaluate a named benchmark on a design given in unit coordinates."""
    try:
        f, bounds = MODELS[model]
    except KeyError:
        raise ValueError(f"unknown model {model!r}") from None
    U = np.atleast_2d(U)
    if U.shape[1] != len(bounds):
        raise ValueError(f"{model} takes {len(bounds)} inputs, design has {U.shape[1]}")
    return np.atleast_1d(f(rescale_from_unit(U, bounds)))
