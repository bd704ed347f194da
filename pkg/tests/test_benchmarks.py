import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ta2s2.benchmarks import (WING_BOUNDS, franke, lhs_design, rescale_from_unit,
                              rescale_to_unit, simulate, wing_weight)
from ta2s2.gp import DomainError

WING_MID = np.array([175, 260, 8, 0, 30.5, 0.75, 0.13, 4.25, 2100, 0.0525], dtype=float)


def test_franke_origin():
    hand = 0.75 * math.exp(-2) + 0.75 * math.exp(-1 / 49 - 1 / 10) + 0.5 * math.exp(-14.5) \
        - 0.2 * math.exp(-65)
    assert franke([0.0, 0.0]) == pytest.approx(0.766420591284923, rel=1e-14)
    assert franke([0.0, 0.0]) == pytest.approx(hand, rel=1e-14)


def test_franke_term_centres():
    x = np.array([7 / 9, 3 / 9])
    a, b = 9 * x
    others = (0.75 * math.exp(-((a - 2) ** 2) / 4 - (b - 2) ** 2 / 4)
              + 0.75 * math.exp(-((a + 1) ** 2) / 49 - (b + 1) / 10)
              - 0.2 * math.exp(-((a - 4) ** 2) - (b - 7) ** 2))
    assert franke(x) - others == pytest.approx(0.5, rel=1e-12)
    x = np.array([4 / 9, 7 / 9])
    a, b = 9 * x
    others = (0.75 * math.exp(-((a - 2) ** 2) / 4 - (b - 2) ** 2 / 4)
              + 0.75 * math.exp(-((a + 1) ** 2) / 49 - (b + 1) / 10)
              + 0.5 * math.exp(-((a - 7) ** 2) / 4 - (b - 3) ** 2 / 4))
    assert franke(x) - others == pytest.approx(-0.2, rel=1e-12)


def test_franke_vectorised():
    X = np.random.default_rng(0).uniform(size=(5, 2))
    np.testing.assert_allclose(franke(X), [franke(x) for x in X])


def test_wing_midpoint():
    assert wing_weight(WING_MID) == pytest.approx(267.624692570435685, rel=1e-13)


def test_wing_zero_sweep_simplified():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rescale_from_unit(rng.uniform(size=10), WING_BOUNDS)
        x[3] = 0.0
        Sw, Wfw, A, _, q, lam, tc, Nz, Wdg, Wp = x
        simple = (0.036 * Sw**0.758 * Wfw**0.0035 * A**0.6 * q**0.006 * lam**0.04
                  * (100 * tc) ** -0.3 * (Nz * Wdg) ** 0.49 + Sw * Wp)
        assert wing_weight(x) == pytest.approx(simple, rel=1e-13)


def test_wing_increases_with_load_factor():
    lo, hi = WING_MID.copy(), WING_MID.copy()
    lo[7], hi[7] = 3.0, 5.0
    assert wing_weight(hi) > wing_weight(lo)


def test_wing_sweep_is_in_degrees():
    x = WING_MID.copy()
    x[3] = 10.0
    assert wing_weight(x) > wing_weight(WING_MID)
    assert wing_weight(x) < 1.05 * wing_weight(WING_MID)


def test_wing_domain():
    x = WING_MID.copy()
    x[0] = 100.0
    with pytest.raises(DomainError):
        wing_weight(x)
    with pytest.raises(DomainError):
        wing_weight(np.ones(9))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10_000), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_lhs_one_point_per_stratum(n, p, seed):
    X = lhs_design(n, p, np.random.default_rng(seed))
    assert X.shape == (n, p)
    assert np.all((X >= 0) & (X < 1))
    for col in X.T:
        np.testing.assert_array_equal(np.sort(np.floor(col * n)), np.arange(n))


def test_lhs_single_point_and_mean():
    X = lhs_design(1, 3, np.random.default_rng(2))
    assert X.shape == (1, 3) and np.all((X >= 0) & (X < 1))
    X = lhs_design(1000, 4, np.random.default_rng(3))
    np.testing.assert_allclose(X.mean(0), 0.5, atol=0.01)


def test_lhs_seeded():
    a = lhs_design(20, 2, np.random.default_rng(4))
    b = lhs_design(20, 2, np.random.default_rng(4))
    np.testing.assert_array_equal(a, b)


def test_rescale():
    b = np.array([[2.0, 4.0], [-10.0, 10.0]])
    np.testing.assert_array_equal(rescale_to_unit([[2.0, -10.0], [4.0, 10.0]], b), [[0, 0], [1, 1]])
    assert rescale_to_unit(np.zeros((1, 10)) + WING_MID, WING_BOUNDS)[0, 3] == 0.5
    U = np.random.default_rng(5).uniform(size=(10, 2))
    np.testing.assert_allclose(rescale_to_unit(rescale_from_unit(U, b), b), U, rtol=1e-14)
    with pytest.raises(ValueError):
        rescale_to_unit([[1.0]], [[1.0, 1.0]])
    with pytest.raises(ValueError):
        rescale_to_unit([[1.0]], [[0.0, math.inf]])


def test_simulate():
    U = np.array([[0.5] * 10])
    assert simulate("wing_weight", U)[0] == pytest.approx(267.624692570435685, rel=1e-13)
    assert simulate("franke", [[0.0, 0.0]])[0] == franke([0.0, 0.0])
    with pytest.raises(ValueError):
        simulate("franke", U)
    with pytest.raises(ValueError):
        simulate("nope", U)
