import numpy as np
import pytest

from kpplab.errors import ConfigError, DomainError
from kpplab.reactions import (CubicPerturbed, ExactWaveFamily, Logistic,
                              TableReaction, build_pulled_reaction,
                              exact_wave_oracle, homogeneous_wave_profile,
                              load_tabulated_reaction, validate_kpp)
from kpplab.signals import Constant, Sinusoid

TS = np.linspace(0.0, 12.0, 25)
US = np.linspace(1e-6, 1.0, 101)


def test_logistic_values_and_certificate():
    rx = Logistic(Sinusoid(2.0, 1.0, 1.0, 0.0))
    u = np.linspace(0.0, 1.0, 11)
    assert np.allclose(rx.eval(0.0, u), 2.0 * u * (1.0 - u))
    cert = validate_kpp(rx, TS, US)
    assert cert.passed, cert.violations[:3]


def test_cubic_family_value_and_certificate():
    fam = ExactWaveFamily(2.0, Constant(0.0))
    rx = fam.reaction()
    assert rx.eval(0.0, 0.5) == pytest.approx(0.625)
    cert = validate_kpp(rx, TS, US)
    assert cert.passed, cert.violations[:3]


def test_cubic_rejects_excessive_perturbation():
    with pytest.raises(ConfigError):
        CubicPerturbed(2.0, Sinusoid(0.0, 2.0, 1.0, 0.0))  # amp >= sqrt2(alpha-1)
    with pytest.raises(ConfigError):
        CubicPerturbed(1.0, Constant(0.0))


def test_linear_extension_and_domain_error():
    rx = Logistic(Constant(1.0))
    # continued linearly just outside [0, 1]
    f_in = rx.eval(0.0, 1.0)
    slope = (rx.eval(0.0, 1.0 + 1e-6) - f_in) / 1e-6
    assert np.isfinite(slope)
    with pytest.raises(DomainError):
        rx.eval(0.0, 1.8)
    with pytest.raises(DomainError):
        rx.eval(0.0, -0.8)


def test_exact_wave_solves_the_equation():
    fam = ExactWaveFamily(2.0, Sinusoid(0.0, 0.3, 1.0, 0.0))
    rx = fam.reaction()
    h, k = 1e-4, 1e-5
    for (x, t) in [(0.3, 1.1), (-2.0, 4.7), (5.0, 0.2)]:
        u = lambda xx, tt: exact_wave_oracle(fam, xx, tt)
        ut = (u(x, t + k) - u(x, t - k)) / (2 * k)
        uxx = (u(x + h, t) - 2 * u(x, t) + u(x - h, t)) / (h * h)
        res = ut - uxx - rx.eval(t, u(x, t))
        assert abs(res) < 1e-5


def test_exact_wave_profile_normalization():
    fam = ExactWaveFamily(2.0, Constant(0.0))
    assert fam.profile(0.0) == pytest.approx(0.5)
    z = np.linspace(-30.0, 30.0, 101)
    prof = fam.profile(z)
    assert np.all(np.diff(prof) < 0)
    assert prof[0] == pytest.approx(1.0, abs=1e-8)
    assert prof[-1] == pytest.approx(0.0, abs=1e-8)


def test_pulled_reaction_tail_rate():
    f = lambda u: u * (1.0 - u)
    rx = build_pulled_reaction(f, 1.0, 2.5, Constant(1.0))
    # decay rate of the minimal-side tail for c = 2.5, f'(0) = 1
    assert rx.lambda_c == pytest.approx(0.5, abs=1e-6)
    prof = rx.profile
    assert prof(0.0) == pytest.approx(0.5, abs=1e-3)
    # probe at u-values the table resolves; below its spacing the linear
    # interpolant undershoots the analytic slope by more than C u^2 allows
    cert = validate_kpp(rx, TS[:5], np.linspace(0.01, 1.0, 51))
    assert cert.passed, cert.violations[:3]


def test_homogeneous_profile_is_monotone():
    prof = homogeneous_wave_profile(lambda u: u * (1.0 - u), 1.0, 2.5)
    z = np.linspace(-20.0, 20.0, 401)
    vals = prof(z)
    assert np.all(np.diff(vals) <= 0)
    assert prof(0.0) == pytest.approx(0.5, abs=1e-3)


def test_tabulated_reaction_roundtrip(tmp_path):
    u = np.linspace(0.0, 1.0, 201)
    f = u * (1.0 - u)
    path = tmp_path / "table.csv"
    np.savetxt(path, np.column_stack([u, f]), delimiter=",")
    rx = load_tabulated_reaction(str(path), Constant(2.0))
    uu = np.linspace(0.0, 1.0, 31)
    assert np.allclose(rx.eval(0.0, uu), 2.0 * uu * (1.0 - uu), atol=1e-4)


def test_validate_kpp_flags_superlinear_shape(tmp_path):
    u = np.linspace(0.0, 1.0, 401)
    f = u * (1.0 - u) * (1.0 + 4.0 * u)  # exceeds its own linearization
    path = tmp_path / "bad.csv"
    np.savetxt(path, np.column_stack([u, f]), delimiter=",")
    rx = load_tabulated_reaction(str(path), Constant(1.0))
    cert = validate_kpp(rx, TS[:3], US)
    assert not cert.passed
    assert cert.violations
