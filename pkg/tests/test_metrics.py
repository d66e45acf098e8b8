import math

import numpy as np
import pytest

from pikfnn import LevelReference, UndefinedMetricError, l2_relative_error, spl


def test_lrerr_identity():
    t = np.array([1 + 2j, -3j, 0.5])
    assert l2_relative_error(t, t) == 0.0


def test_lrerr_double():
    t = np.array([1 + 2j, -3j, 0.5])
    assert l2_relative_error(2 * t, t) == pytest.approx(1.0, rel=1e-15)


def test_lrerr_hand_value():
    assert l2_relative_error([1, 0], [1, 1]) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_lrerr_invariances():
    rng = np.random.default_rng(0)
    t = rng.normal(size=20) + 1j * rng.normal(size=20)
    p = t + 0.1 * (rng.normal(size=20) + 1j * rng.normal(size=20))
    base = l2_relative_error(p, t)
    rot = np.exp(0.7j) * 3.5
    assert l2_relative_error(rot * p, rot * t) == pytest.approx(base, rel=1e-13)


def test_lrerr_errors():
    with pytest.raises(UndefinedMetricError):
        l2_relative_error([1, 2], [0, 0])
    with pytest.raises(UndefinedMetricError):
        l2_relative_error([], [])
    with pytest.raises(ValueError):
        l2_relative_error([1, 2], [1])


def test_spl_values():
    ref = LevelReference(1e-6)
    assert spl(1e-6, ref) == pytest.approx(0.0, abs=1e-12)
    assert spl(1.0, ref) == pytest.approx(120.0, abs=1e-12)
    assert spl(14.95, ref) == pytest.approx(143.5, abs=0.05)
    assert spl(1j) == pytest.approx(120.0, abs=1e-12)


def test_spl_scaling_and_monotone():
    p = np.array([1e-3, 0.1, 3.0, 1e4])
    levels = spl(p)
    assert np.all(np.diff(levels) > 0)
    assert np.allclose(spl(7.0 * p), levels + 20 * math.log10(7.0), atol=1e-12)


def test_spl_zero_sentinel():
    level, valid = spl(np.array([0.0, 1.0]), return_valid=True)
    assert level[0] == -np.inf and not valid[0]
    assert valid[1]
    assert spl(0.0) == -np.inf


def test_reference_validation():
    with pytest.raises(ValueError):
        LevelReference(0.0)
