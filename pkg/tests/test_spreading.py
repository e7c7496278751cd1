import numpy as np
import pytest

from kpplab.reactions import Logistic
from kpplab.signals import Constant
from kpplab.spreading import (empirical_speed_least_mean, plateau_datum,
                              spreading_experiment, track_front)


def test_plateau_datum_shape():
    r = np.linspace(0.0, 20.0, 401)
    u = plateau_datum(r, 10.0, width=2.0)
    assert np.all(u[r <= 10.0] == 1.0)
    assert np.all(u[r >= 12.0] == 0.0)
    assert np.all(np.diff(u) <= 1e-15)


@pytest.fixture(scope="module")
def homogeneous_spread():
    rx = Logistic(Constant(1.0))
    return spreading_experiment(rx, t_end=24.0, r_max=150.0, dz=0.2,
                                datum_radius=10.0, inner_speeds=(1.5,),
                                envelope_sigma=0.5)


def test_inner_region_fills(homogeneous_spread):
    rep = homogeneous_spread
    assert rep.lower_threshold == pytest.approx(2.0, abs=1e-6)
    assert float(rep.inner_inf[0]) >= 0.99


def test_outer_region_stays_empty_late(homogeneous_spread):
    rep = homogeneous_spread
    assert float(rep.outer_sup[-1]) <= 1e-6
    # the bound decays in time once the transient has passed
    assert float(rep.outer_sup[-1]) < float(rep.outer_sup[4])


def test_front_speed_approaches_spreading_speed(homogeneous_spread):
    rep = homogeneous_spread
    sp = np.asarray(rep.trace.speeds())
    # classical logarithmic delay keeps the instantaneous speed below 2
    assert np.all(sp[5:] < 2.0)
    assert sp[-1] > 1.7


def test_track_front_linear_synthetic():
    from kpplab.solver import Grid1D, Trajectory

    grid = Grid1D(0.0, 100.0, 1001)
    z = grid.nodes()
    times = np.linspace(1.0, 10.0, 10)
    states = np.array([np.clip(1.0 - 0.1 * (z - 3.0 * t), 0.0, 1.0)
                       for t in times])
    traj = Trajectory(grid=grid, times=times, states=states,
                      certificate=None, backend="synthetic",
                      kind="synthetic", n_substeps=0)
    trace = track_front(traj, level=0.5)
    fit = np.polyfit(trace.times, trace.positions, 1)
    assert fit[0] == pytest.approx(3.0, abs=1e-9)
    rep = empirical_speed_least_mean(trace)
    assert rep.lower_least_mean == pytest.approx(3.0, abs=1e-6)
