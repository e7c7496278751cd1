import numpy as np
import pytest

from kpplab.errors import ConfigError
from kpplab.randomenv import (RandomEnvironmentModel,
                              least_mean_concentration,
                              shift_covariance_check)


def test_model_realizations_are_reproducible():
    model = RandomEnvironmentModel()
    ts = np.linspace(-20.0, 20.0, 401)
    a = model.sample(3).eval(ts)
    b = model.sample(3).eval(ts)
    c = model.sample(4).eval(ts)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all((a >= 1.5) & (a <= 2.5))


def test_model_validates_parameters():
    with pytest.raises(ConfigError):
        RandomEnvironmentModel(lo=2.0, hi=1.0)
    with pytest.raises(ConfigError):
        RandomEnvironmentModel(block=0.0)


def test_concentration_narrows_with_horizon():
    model = RandomEnvironmentModel()
    rep = least_mean_concentration(model, seeds=range(6),
                                   horizons=(200.0, 800.0))
    assert rep.estimates.shape == (2, 6)
    assert rep.narrows()
    # estimates live between the deterministic floor and the block mean
    assert np.all(rep.estimates >= 1.5 - 1e-12)
    assert np.all(rep.estimates <= 2.5 + 1e-12)


def test_shift_covariance_is_exact_on_speeds():
    model = RandomEnvironmentModel()
    rep = shift_covariance_check(model, gamma=3.2, shift=1.25, seed=2,
                                 window=(8.0, 12.0), n_schedule=(5, 10))
    assert rep.speed_defect == 0.0
    assert rep.profile_defect <= 5.0 * rep.threshold
