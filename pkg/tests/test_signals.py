import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpplab.errors import ConfigError
from kpplab.signals import (Affine, BlockRandom, Constant, PiecewiseConstant,
                            Sinusoid, build_corrector, least_mean,
                            no_uniform_mean_signal)


def test_constant_least_mean_exact_and_estimated():
    sig = Constant(5.0)
    assert sig.least_mean_exact() == 5.0
    rep = least_mean(sig, horizon=32.0)
    assert rep.lower_least_mean == pytest.approx(5.0, abs=1e-12)


def test_sinusoid_least_mean_is_offset():
    sig = Sinusoid(2.0, 1.0, 1.0, 0.0)
    assert sig.least_mean_exact() == 2.0
    rep = least_mean(sig, horizon=256.0)
    assert rep.lower_least_mean == pytest.approx(2.0, abs=0.05)
    # finite windows underestimate, never overestimate
    assert rep.lower_least_mean <= 2.0 + 1e-12


def test_piecewise_constant_antiderivative_consistency():
    sig = PiecewiseConstant((1.0, 2.5, 4.0), (1.0, 3.0, 0.5, 2.0))
    ts = np.linspace(-2.0, 6.0, 401)
    anti = np.asarray(sig.antiderivative(ts))
    dt = ts[1] - ts[0]
    mid = sig.eval(0.5 * (ts[1:] + ts[:-1]))
    assert np.allclose(np.diff(anti), mid * dt, atol=1e-12)
    assert sig.antiderivative(0.0) == 0.0


def test_piecewise_breakpoints_inside_interval():
    sig = PiecewiseConstant((1.0, 2.5), (1.0, 3.0, 0.5))
    bps = np.asarray(sig.breakpoints(0.0, 2.0))
    assert np.all((bps >= 0.0) & (bps <= 2.0))
    assert 1.0 in bps and 2.5 not in bps


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(0.1, 5.0), offset=st.floats(-3.0, 3.0),
       vals=st.lists(st.floats(-2.0, 2.0), min_size=2, max_size=6))
def test_least_mean_affine_equivariance(scale, offset, vals):
    knots = tuple(float(k) for k in range(1, len(vals)))
    sig = PiecewiseConstant(knots, tuple(vals))
    rep = least_mean(sig, horizon=16.0)
    rep2 = least_mean(Affine(sig, scale, offset), horizon=16.0)
    assert rep2.lower_least_mean == pytest.approx(
        scale * rep.lower_least_mean + offset, abs=1e-9)


def test_block_random_shift_acts_on_realizations():
    sig = BlockRandom("uniform", 1.5, 2.5, seed=7)
    ts = np.linspace(-13.0, 13.0, 257)
    shifted = sig.shifted(3.5)
    assert np.array_equal(shifted.eval(ts), sig.eval(ts + 3.5))
    # same seed reproduces, different seeds differ
    again = BlockRandom("uniform", 1.5, 2.5, seed=7)
    assert np.array_equal(again.eval(ts), sig.eval(ts))
    other = BlockRandom("uniform", 1.5, 2.5, seed=8)
    assert not np.array_equal(other.eval(ts), sig.eval(ts))


def test_corrector_bound_and_residual():
    sig = PiecewiseConstant((0.7, 1.9, 3.1), (0.4, -1.0, 0.9, -0.2))
    T = 1.3
    cor = build_corrector(sig, T, n_blocks=5)
    b_sup = max(abs(sig.ess_lo), abs(sig.ess_hi))
    assert cor.sup_norm <= 2.0 * T * b_sup + 1e-12
    # A' + B equals the block mean of B on each block
    ts = np.linspace(0.05, 5 * T - 0.05, 300)
    res = np.asarray(cor.residual(ts))
    means = np.array([cor.block_mean(cor.block_index(t)) for t in ts])
    assert np.allclose(res, means, atol=1e-9)
    assert cor.ess_inf_residual == pytest.approx(float(np.min(cor.block_means)))


def test_no_uniform_mean_signal_separates_bounds():
    sig = no_uniform_mean_signal()
    rep = least_mean(sig, domain="positive-half-line", horizon=62.0,
                     window_schedule=[1.0, 2.0, 4.0])
    assert rep.lower_least_mean == pytest.approx(1.0, abs=1e-2)
    assert rep.upper_mean == pytest.approx(3.0, abs=1e-2)


def test_block_random_rejects_unknown_distribution():
    with pytest.raises(ConfigError):
        BlockRandom("gaussian", 0.0, 1.0, seed=0)
