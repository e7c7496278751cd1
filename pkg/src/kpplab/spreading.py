"""Spreading experiments: how fast level sets of a Cauchy solution invade.

For compactly supported data the invasion rate is bracketed by
2*sqrt(least mean of mu on the positive half-line) from below and by the
Gaussian-tail envelope 2*sqrt(t * int_0^t mu) + sigma*t from above; a
compactly supported subsolution launched once the solution is locally
uplifted certifies the lower bracket at any prescribed sub-critical speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .barriers import MovingExponentialSupersolution, build_compact_subsolution
from .errors import ConfigError, MeasurementError
from .signals import Affine, PiecewiseConstant, Shifted, least_mean
from .solver import Grid1D, solve_cauchy


@dataclass
class FrontTrace:
    """Positions of a level crossing over the snapshots of a trajectory."""

    level: float
    times: np.ndarray
    positions: np.ndarray

    def speeds(self):
        """Finite-difference speeds on the intervals between snapshots."""
        return np.diff(self.positions) / np.diff(self.times)

    def speed_signal(self):
        """The interval speeds as a piecewise-constant signal starting at 0."""
        t = self.times - self.times[0]
        return PiecewiseConstant(t[1:-1].copy(), self.speeds())


def track_front(traj, level=0.5, drift=None):
    """Rightmost downcrossing of `level` per snapshot, plus optional drift.

    `drift` converts moving-frame positions to the resting frame: a
    TimeSignal whose antiderivative is added to the tracked position.
    """
    z = traj.grid.nodes()
    times = traj.times
    pos = np.empty(times.size)
    for i, u in enumerate(traj.states):
        below = u < level
        if not below.any() or below[0]:
            raise MeasurementError(f"no downcrossing of {level} at t={times[i]}")
        j = int(np.argmax(below))
        pos[i] = z[j - 1] + (level - u[j - 1]) * (z[j] - z[j - 1]) / (u[j] - u[j - 1])
    if drift is not None:
        pos = pos + np.asarray(drift.antiderivative(times))
    return FrontTrace(level=level, times=times.copy(), positions=pos)


def empirical_speed_least_mean(trace, window_schedule=None, stride_divisor=64):
    """Least-mean report for the measured front speed."""
    if trace.times.size < 3:
        raise MeasurementError("front trace too short for a speed estimate")
    sig = trace.speed_signal()
    horizon = float(trace.times[-1] - trace.times[0])
    if window_schedule is None:
        window_schedule = [horizon / 8, horizon / 4, horizon / 2, horizon]
    return least_mean(sig, domain="positive-half-line", horizon=horizon,
                      window_schedule=window_schedule,
                      stride_divisor=stride_divisor)


def plateau_datum(r, radius, width=2.0):
    """Compactly supported datum: 1 on [0, radius], smooth ramp to 0."""
    w = np.clip((np.asarray(r, dtype=float) - radius) / width, 0.0, 1.0)
    return 1.0 - w * w * (3.0 - 2.0 * w)


@dataclass
class OverlayReport:
    """Comparison of a launched compact subsolution against the solution."""

    t_launch: float
    scale: float
    gamma_run: float
    subsolution: object
    max_violation: float  # sup over checked snapshots of overlay - u
    checked_times: np.ndarray


@dataclass
class SpreadingReport:
    trajectory: object
    trace: FrontTrace
    lower_threshold: float  # 2 sqrt(least mean of mu), the guaranteed rate
    inner_speeds: np.ndarray
    inner_inf: np.ndarray  # inf of u over |x| <= gamma*t at t_end per speed
    envelope_sigma: float
    outer_sup: np.ndarray  # per snapshot, sup of u beyond the envelope
    outer_radius: np.ndarray
    overlay: OverlayReport


def _inner_inf(traj, gamma, t):
    r = traj.grid.nodes()
    u = traj.state_at(t)
    sel = r <= gamma * t
    if not sel.any():
        raise MeasurementError("inner region is empty")
    return float(u[sel].min())


def spreading_experiment(reaction, t_end=100.0, r_max=500.0, dz=0.1,
                         datum_radius=10.0, snap_dt=1.0, inner_speeds=(2.5,),
                         envelope_sigma=0.5, mu_lower=None,
                         overlay=None):
    """Run a radial invasion experiment and measure both spreading brackets.

    `overlay`, when given, is a dict with keys epsilon, gamma_run, t_launch,
    block_length, n_blocks: a compact subsolution for the growth signal
    mu(t + t_launch) - epsilon is scaled under the solution at t_launch and
    must stay below it afterwards.
    """
    n = int(round(r_max / dz)) + 1
    grid = Grid1D(0.0, r_max, n)
    r = grid.nodes()
    u0 = plateau_datum(r, datum_radius)
    times = np.arange(0.0, t_end + 0.5 * snap_dt, snap_dt)
    traj = solve_cauchy(reaction, grid, 0.0, t_end, u0, times, dim=1)

    trace = track_front(traj)
    if mu_lower is None:
        mu_lower = reaction.mu.least_mean_exact()
    if mu_lower is None:
        mu_lower = least_mean(reaction.mu, domain="positive-half-line",
                              horizon=min(256.0, t_end)).lower_least_mean
    lower_threshold = 2.0 * math.sqrt(max(mu_lower, 0.0))

    inner_speeds = np.asarray(inner_speeds, dtype=float)
    inner = np.array([_inner_inf(traj, gam, t_end) for gam in inner_speeds])

    sup_env = MovingExponentialSupersolution(reaction.mu, datum_radius)
    outer_sup = np.empty(times.size - 1)
    outer_radius = np.empty(times.size - 1)
    for i, t in enumerate(times[1:]):
        grow = float(reaction.mu.antiderivative(t))
        radius = 2.0 * math.sqrt(t * grow) + envelope_sigma * t + datum_radius
        outer_radius[i] = radius
        sel = r >= radius
        outer_sup[i] = float(traj.states[i + 1][sel].max()) if sel.any() else 0.0

    overlay_report = None
    if overlay is not None:
        overlay_report = _run_overlay(reaction, traj, overlay)

    return SpreadingReport(trajectory=traj, trace=trace,
                           lower_threshold=lower_threshold,
                           inner_speeds=inner_speeds, inner_inf=inner,
                           envelope_sigma=envelope_sigma, outer_sup=outer_sup,
                           outer_radius=outer_radius, overlay=overlay_report)


def _run_overlay(reaction, traj, cfg):
    eps = float(cfg["epsilon"])
    t0 = float(cfg["t_launch"])
    g = Affine(Shifted(reaction.mu, t0), 1.0, -eps)
    sub = build_compact_subsolution(g, cfg["block_length"], cfg["n_blocks"],
                                    cfg["gamma_run"], dim=1)
    # f(t, u) >= (mu - eps) u holds for u below eps / sup mu (KPP reactions
    # lose at most C u^2 against the linearization); cap the overlay there
    u_cap = eps / reaction.mu.ess_hi

    r = traj.grid.nodes()
    u_launch = traj.state_at(t0)
    v0 = sub.eval(r, 0.0)
    mask = v0 > 0
    if not mask.any():
        raise ConfigError("subsolution support misses the grid")
    scale = min(u_cap, float(np.min(u_launch[mask] / v0[mask])))
    if scale <= 0:
        raise ConfigError("solution not positive on the subsolution support")

    horizon = t0 + cfg["block_length"] * cfg["n_blocks"]
    checked = traj.times[(traj.times >= t0) & (traj.times <= horizon)]
    worst = -np.inf
    for t in checked:
        w = scale * sub.eval(r, t - t0)
        worst = max(worst, float(np.max(w - traj.state_at(t))))
    return OverlayReport(t_launch=t0, scale=scale, gamma_run=cfg["gamma_run"],
                         subsolution=sub, max_violation=worst,
                         checked_times=checked)
