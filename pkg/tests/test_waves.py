import numpy as np
import pytest

from kpplab.errors import ConfigError, RejectionError
from kpplab.reactions import Logistic
from kpplab.signals import Constant
from kpplab.waves import construct_wave, front_decay_rate, wave_diagnostics


@pytest.fixture(scope="module")
def homogeneous_bundle():
    rx = Logistic(Constant(1.0))
    return construct_wave(rx, 2.5, window=(8.0, 12.0), snap_dt=1.0,
                          n_schedule=(6, 12, 24), threshold=0.02)


def test_wave_converges_to_a_front(homogeneous_bundle):
    b = homogeneous_bundle
    assert b.converged
    gaps = [g for _, _, g in b.convergence_table]
    assert gaps == sorted(gaps, reverse=True)
    diag = wave_diagnostics(b)
    assert diag.is_front()
    assert diag.comparison.within(1e-6)


def test_wave_tail_decays_at_kappa(homogeneous_bundle):
    b = homogeneous_bundle
    assert b.kappa == pytest.approx(0.5)
    diag = wave_diagnostics(b)
    assert diag.decay_rate == pytest.approx(b.kappa, rel=0.05)


def test_wave_profile_between_barriers(homogeneous_bundle):
    b = homogeneous_bundle
    z = b.grid.nodes()
    up = b.barriers.upper(z)
    for t, row in zip(b.times, b.profile):
        assert np.all(row <= up + 1e-6)
        assert np.all(row >= b.barriers.lower(z, t) - 1e-6)


def test_front_decay_rate_recovers_synthetic_rate():
    z = np.linspace(0.0, 60.0, 1201)
    u = np.exp(-0.7 * z)
    assert front_decay_rate(z, u) == pytest.approx(0.7, rel=1e-3)


def test_construct_wave_rejects_slow_speed():
    with pytest.raises(RejectionError):
        construct_wave(Logistic(Constant(1.0)), 1.5,
                       window=(8.0, 12.0), n_schedule=(6, 12))


def test_construct_wave_validates_schedule():
    rx = Logistic(Constant(1.0))
    with pytest.raises(ConfigError):
        construct_wave(rx, 2.5, n_schedule=(10, 10))
    with pytest.raises(ConfigError):
        construct_wave(rx, 2.5, window=(5.0, 2.0))
