"""End-to-end acceptance suite: nine numbered criteria, one line each.

Each test prints ``ACCEPTANCE <n> [<name>]: PASS/FAIL`` with the measured
numbers, then asserts.  Configurations and tolerances are fixed here on
purpose -- these are the runs the package promises to get right.
"""

import math
import time

import numpy as np

from kpplab.barriers import build_bump, build_speed, halton_triples
from kpplab.errors import RejectionError
from kpplab.randomenv import (RandomEnvironmentModel,
                              least_mean_concentration,
                              shift_covariance_check)
from kpplab.reactions import ExactWaveFamily, Logistic
from kpplab.signals import (Constant, PiecewiseConstant, Sinusoid,
                            build_corrector, least_mean,
                            no_uniform_mean_signal)
from kpplab.solver import Grid1D, solve_profile_frame
from kpplab.spreading import (empirical_speed_least_mean,
                              spreading_experiment, track_front)
from kpplab.waves import construct_wave, wave_diagnostics


def _report(n, name, ok, detail):
    line = f"ACCEPTANCE {n} [{name}]: {'PASS' if ok else 'FAIL'} -- {detail}"
    print("\n" + line)
    assert ok, line


def test_acceptance_1_exact_front_oracle():
    t0 = time.perf_counter()
    xi = Sinusoid(0.0, 0.3, 1.0, 0.0)
    fam = ExactWaveFamily(2.0, xi)
    rx = fam.reaction()
    speed = xi.affine(1.0, fam.c0)  # frame speed; the exact profile is fixed
    dz = 0.05
    half = 30.0
    grid = Grid1D(-half, half, int(round(2 * half / dz)) + 1)
    z = grid.nodes()
    t_end = 4.0 * math.pi
    snaps = np.linspace(0.0, t_end, 26)
    traj = solve_profile_frame(rx, speed, grid, 0.0, t_end,
                               fam.profile(z), snaps, dt=dz * dz,
                               left=1.0, right=float(fam.profile(half)),
                               correct_advection=True)
    err = float(np.max(np.abs(traj.states - fam.profile(z)[None, :])))
    # front position in the resting frame = frame crossing + integral of c
    trace = track_front(traj, level=0.5, drift=speed)
    speed_est = empirical_speed_least_mean(trace).lower_least_mean
    rel = abs(speed_est - fam.c0) / fam.c0
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-3 and rel <= 0.01 and elapsed <= 60.0
    _report(1, "closed-form front oracle", ok,
            f"L_inf error {err:.3e} (<= 1e-3), front speed {speed_est:.4f} "
            f"vs {fam.c0:.4f} (rel {rel:.2%} <= 1%), {elapsed:.1f}s (<= 60s)")


def test_acceptance_2_speed_law_exactness():
    law = build_speed(Constant(1.0), 2.5)
    ts = np.linspace(0.0, 50.0, 101)
    exact = (law.kappa == 0.5
             and float(np.max(np.abs(law.speed(ts) - 2.5))) == 0.0)
    rejected = []
    for gamma in (2.0, 1.5):
        try:
            build_speed(Constant(1.0), gamma)
            rejected.append(False)
        except RejectionError:
            rejected.append(True)
    ok = exact and all(rejected)
    _report(2, "speed law", ok,
            f"kappa = {law.kappa} (exact 0.5), c(t) = 2.5 exactly, "
            f"gamma <= 2 rejected: {rejected}")


def test_acceptance_3_corrector_bounds():
    rng = np.random.default_rng(42)
    worst_norm, worst_floor = 0.0, 0.0
    for _ in range(50):
        n_knots = int(rng.integers(2, 9))
        knots = tuple(np.sort(rng.uniform(0.2, 9.8, n_knots)))
        values = tuple(rng.uniform(-3.0, 3.0, n_knots + 1))
        sig = PiecewiseConstant(knots, values)
        T = float(rng.uniform(0.5, 4.0))
        n_blocks = int(rng.integers(2, 8))
        cor = build_corrector(sig, T, n_blocks=n_blocks)
        b_sup = max(abs(sig.ess_lo), abs(sig.ess_hi))
        worst_norm = max(worst_norm, cor.sup_norm - 2.0 * T * b_sup)
        worst_floor = max(worst_floor,
                          abs(cor.ess_inf_residual
                              - float(np.min(cor.block_means))))
    ok = worst_norm <= 0.0 and worst_floor <= 1e-8
    _report(3, "corrector bounds, 50 random signals", ok,
            f"worst sup-norm excess {worst_norm:.3e} (<= 0), worst residual "
            f"floor mismatch {worst_floor:.3e} (<= 1e-8)")


def test_acceptance_4_least_mean_estimation():
    sin_rep = least_mean(Sinusoid(2.0, 1.0, 1.0, 0.0), horizon=1024.0,
                         window_schedule=[16.0, 32.0, 64.0, 128.0, 256.0])
    sin_err = abs(sin_rep.lower_least_mean - 2.0)
    stage = no_uniform_mean_signal()
    rep = least_mean(stage, domain="positive-half-line", horizon=62.0,
                     window_schedule=[1.0, 2.0, 4.0])
    lo_err = abs(rep.lower_least_mean - 1.0)
    hi_err = abs(rep.upper_mean - 3.0)
    ok = sin_err <= 1e-2 and lo_err <= 1e-2 and hi_err <= 1e-2
    _report(4, "least-mean estimation", ok,
            f"2+sin t -> {sin_rep.lower_least_mean:.4f} (err {sin_err:.1e} "
            f"<= 1e-2); staged signal lower {rep.lower_least_mean:.4f} / "
            f"upper {rep.upper_mean:.4f} (errs {lo_err:.1e}, {hi_err:.1e})")


def test_acceptance_5_front_construction():
    rx = Logistic(Sinusoid(2.0, 1.0, 1.0, 0.0))
    bundle = construct_wave(rx, 3.2, mu_lower=2.0)
    diag = wave_diagnostics(bundle)
    gap = bundle.convergence_table[-1][2]
    decay_rel = abs(diag.decay_rate - bundle.kappa) / bundle.kappa
    speed_rep = least_mean(bundle.speed, horizon=1024.0,
                           window_schedule=[16.0, 32.0, 64.0, 128.0, 256.0])
    speed_rel = abs(speed_rep.lower_least_mean - 3.2) / 3.2
    ok = (diag.comparison.within(1e-4)
          and diag.monotone_defect <= 1e-10
          and gap <= 1e-4
          and decay_rel <= 0.05
          and speed_rel <= 0.02)
    _report(5, "front construction, mu = 2 + sin t, gamma = 3.2", ok,
            f"barrier violations ({diag.comparison.lower_violation:.1e}, "
            f"{diag.comparison.upper_violation:.1e}) <= 1e-4, monotone defect "
            f"{diag.monotone_defect:.1e}, final gap {gap:.2e} <= 1e-4, tail "
            f"decay {diag.decay_rate:.4f} vs kappa {bundle.kappa:.4f} "
            f"(rel {decay_rel:.2%} <= 5%), speed least mean "
            f"{speed_rep.lower_least_mean:.4f} (rel {speed_rel:.2%} <= 2%)")


def test_acceptance_6_bump_profile():
    t0 = time.perf_counter()
    bump = build_bump(1.0, 3.0, 0.5)
    r = np.linspace(0.0, bump.r, 10002)[1:-1]
    h, hp, hpp = bump.value(r), bump.prime(r), bump.second(r)
    min_op = math.inf
    for a, q, c in halton_triples(1000, 1.0, 3.0, 0.5):
        min_op = min(min_op, float(np.min(a * hpp - q * hp + c * h)))
    step = 1e-7
    join = 0.0
    for r0 in (bump.s0 / bump.eps, bump.r, 0.0):
        for f in (bump.value, bump.prime, bump.second):
            join = max(join, abs(float(f(r0 + step)) - float(f(r0 - step))))
    elapsed = time.perf_counter() - t0
    ok = min_op > 0.0 and join <= 1e-8 and elapsed <= 30.0
    _report(6, "compact bump, (beta, sigma, theta) = (1, 3, 1/2)", ok,
            f"min operator over 1000 admissible triples x 1e4 points "
            f"{min_op:.3e} (> 0), C2 join defect {join:.2e} (<= 1e-8), "
            f"{elapsed:.1f}s (<= 30s)")


def test_acceptance_7_spreading():
    t0 = time.perf_counter()
    rx = Logistic(Sinusoid(2.0, 1.0, 1.0, 0.0))
    rep = spreading_experiment(
        rx, t_end=100.0, r_max=500.0, dz=0.1, datum_radius=10.0,
        inner_speeds=(2.5,), envelope_sigma=0.5,
        overlay=dict(epsilon=0.5, gamma_run=1.0, t_launch=30.0,
                     block_length=2.0 * math.pi, n_blocks=8))
    inner = float(rep.inner_inf[0])
    outer = float(rep.outer_sup[-1])
    viol = rep.overlay.max_violation
    elapsed = time.perf_counter() - t0
    ok = (inner >= 0.99 and outer <= 1e-3 and viol <= 1e-4
          and elapsed <= 600.0)
    _report(7, "spreading, mu = 2 + sin t", ok,
            f"inf over |x| <= 2.5t at t=100: {inner:.6f} (>= 0.99), sup "
            f"outside the envelope at t=100: {outer:.2e} (<= 1e-3), compact "
            f"subsolution excess {viol:.2e} (<= 1e-4), {elapsed:.0f}s "
            f"(<= 600s)")


def test_acceptance_8_random_environment():
    t0 = time.perf_counter()
    model = RandomEnvironmentModel("uniform", 1.5, 2.5, 1.0)
    cov = shift_covariance_check(model, gamma=3.2, shift=3.5, seed=0)
    conc = least_mean_concentration(model, seeds=range(20),
                                    horizons=(1.0e3, 4.0e3))
    spreads = conc.spreads
    elapsed = time.perf_counter() - t0
    ok = (cov.speed_defect == 0.0
          and cov.profile_defect <= 5.0 * cov.threshold
          and spreads[1] < spreads[0]
          and elapsed <= 1200.0)
    _report(8, "iid uniform blocks, gamma = 3.2, shift 3.5", ok,
            f"speed defect {cov.speed_defect} (exactly 0), profile defect "
            f"{cov.profile_defect:.2e} (<= {5.0 * cov.threshold:.0e}), "
            f"least-mean spread over 20 seeds {spreads[0]:.4f} @1e3 -> "
            f"{spreads[1]:.4f} @4e3 (narrows), {elapsed:.0f}s (<= 1200s)")


def test_acceptance_9_order_of_accuracy():
    xi = Sinusoid(0.0, 0.3, 1.0, 0.0)
    fam = ExactWaveFamily(2.0, xi)
    rx = fam.reaction()
    speed = xi.affine(1.0, fam.c0)
    t_end = 4.0 * math.pi
    errs = []
    for dz in (0.05, 0.025):
        half = 30.0
        grid = Grid1D(-half, half, int(round(2 * half / dz)) + 1)
        z = grid.nodes()
        traj = solve_profile_frame(rx, speed, grid, 0.0, t_end,
                                   fam.profile(z), np.linspace(0.0, t_end, 9),
                                   dt=dz * dz, left=1.0,
                                   right=float(fam.profile(half)),
                                   correct_advection=True)
        errs.append(float(np.max(np.abs(traj.states - fam.profile(z)))))
    ratio = errs[0] / errs[1]
    ok = 3.0 <= ratio <= 5.0
    _report(9, "refinement order against the oracle", ok,
            f"L_inf errors {errs[0]:.3e} -> {errs[1]:.3e} under dz halving, "
            f"ratio {ratio:.2f} in [3, 5]")
