import numpy as np
import pytest

from kpplab.barriers import (MovingExponentialSupersolution, build_barriers,
                             build_bump, build_compact_subsolution,
                             build_speed, halton_triples)
from kpplab.errors import RejectionError
from kpplab.reactions import Logistic
from kpplab.signals import Constant, Sinusoid


def test_speed_law_homogeneous_exact():
    law = build_speed(Constant(1.0), 2.5)
    assert law.kappa == pytest.approx(0.5)
    assert law.kappa2 == pytest.approx(2.0)
    ts = np.linspace(0.0, 10.0, 11)
    assert np.allclose(law.speed(ts), 2.5)


def test_speed_law_rejects_slow_targets():
    for gamma in (2.0, 1.5, -1.0):
        with pytest.raises(RejectionError):
            build_speed(Constant(1.0), gamma)


def test_speed_law_decomposition():
    mu = Sinusoid(2.0, 1.0, 1.0, 0.0)
    law = build_speed(mu, 3.2, mu_lower=2.0)
    ts = np.linspace(0.0, 20.0, 41)
    assert np.allclose(law.speed(ts), law.kappa + mu.eval(ts) / law.kappa)
    # least mean of the speed is the target
    assert law.kappa + 2.0 / law.kappa == pytest.approx(3.2)


def test_barrier_pair_orders_and_has_signed_defects():
    rx = Logistic(Sinusoid(2.0, 1.0, 1.0, 0.0))
    bp = build_barriers(rx, 3.2, domain=(-40.0, 40.0), mu_lower=2.0)
    z = np.linspace(-30.0, 30.0, 301)
    ts = np.linspace(-20.0, 20.0, 17)
    up = bp.upper(z)
    assert np.all((up >= 0.0) & (up <= 1.0))
    for t in ts:
        lo = bp.lower(z, t)
        assert np.all(lo <= up + 1e-12)
        assert np.all(lo >= 0.0)
        assert np.min(bp.supersolution_defect(z, t)) >= -1e-10
        sub = bp.subsolution_defect(z, t)  # NaN off the support
        assert np.any(np.isfinite(sub))
        assert np.nanmax(sub) <= 1e-10


def test_bump_shape_and_worst_case_positivity():
    bump = build_bump(1.0, 1.0, 0.5)
    r = np.linspace(1e-6, bump.r - 1e-6, 2001)
    h = bump.value(r)
    assert np.all(np.diff(h) >= -1e-14)
    assert float(bump.value(0.0)) == 0.0
    assert float(bump.value(bump.r + 1.0)) == 1.0
    assert float(np.min(bump.worst_operator_value(r))) > 0.0


def test_bump_sampled_triples_stay_positive():
    bump = build_bump(1.0, 1.0, 0.5)
    r = np.linspace(1e-6, bump.r - 1e-6, 501)
    for a, q, c in halton_triples(100, 1.0, 1.0, 0.5):
        assert 4.0 * a * c - q * q >= 0.5 - 1e-12
        assert float(np.min(bump.operator_value(a, q, c, r))) > 0.0


def test_compact_subsolution_defect_sign():
    g = Sinusoid(2.0, 1.0, 1.0, 0.0)
    for dim in (1, 2):
        sub = build_compact_subsolution(g, 2.0 * np.pi, 4, 1.0, dim=dim)
        r = np.linspace(1e-3, 40.0, 400)
        for t in np.linspace(0.0, 8.0 * np.pi, 9):
            vals = sub.eval(r, float(t))
            assert np.all(vals >= 0.0)
            d = sub.defect(r, float(t))  # NaN off the support
            assert np.any(np.isfinite(d))
            assert np.nanmax(d) <= 1e-9


def test_moving_supersolution_envelope_is_tight():
    mu = Sinusoid(2.0, 1.0, 1.0, 0.0)
    sup = MovingExponentialSupersolution(mu, 10.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        t = float(rng.uniform(0.5, 30.0))
        x = float(rng.uniform(11.0, 200.0))
        kappas = np.linspace(1e-3, 20.0, 20001)
        brute = float(np.min([sup.eval(t, x, k) for k in kappas]))
        assert sup.envelope(t, x) <= brute * (1.0 + 1e-6) + 1e-300
