"""Bounded time signals and the least-mean calculus.

A signal is a bounded measurable function of time with exact evaluation,
exact antiderivatives, and known essential bounds.  Windowed means, the
lower least mean (sup over window lengths of the inf over window starts)
and its upper counterpart are estimated by direct window scans; the
bounded corrector A with A' + B pinched above the minimal block mean is
built blockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, NumericalError

_PHASE_KEY = 0
_VALUE_KEY = 1
_KEY_OFFSET = 1 << 40  # block indices are mapped to non-negative spawn keys


def _as_array(t):
    a = np.asarray(t, dtype=float)
    return a, a.ndim == 0


class TimeSignal:
    """Base class: deterministic scalar function of time with exact integrals."""

    ess_lo: float = -math.inf
    ess_hi: float = math.inf

    def eval(self, t):
        raise NotImplementedError

    def antiderivative(self, t):
        """Exact value of the integral from 0 to t (vectorized)."""
        raise NotImplementedError

    def integral(self, a, b):
        return self.antiderivative(b) - self.antiderivative(a)

    def breakpoints(self, a, b):
        """Discontinuity locations inside (a, b), sorted."""
        return np.empty(0)

    def least_mean_exact(self):
        """Closed-form lower least mean over the whole line, if known."""
        return None

    def shifted(self, s):
        if s == 0:
            return self
        return Shifted(self, s)

    def affine(self, scale, offset):
        return Affine(self, scale, offset)

    def __call__(self, t):
        return self.eval(t)


@dataclass(frozen=True)
class Constant(TimeSignal):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "ess_lo", self.value)
        object.__setattr__(self, "ess_hi", self.value)

    def eval(self, t):
        a, scalar = _as_array(t)
        out = np.full_like(a, self.value)
        return float(out) if scalar else out

    def antiderivative(self, t):
        a, scalar = _as_array(t)
        out = self.value * a
        return float(out) if scalar else out

    def least_mean_exact(self):
        return self.value


@dataclass(frozen=True)
class Sinusoid(TimeSignal):
    """offset + amp * sin(omega * t + phase)"""

    offset: float
    amp: float
    omega: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "ess_lo", self.offset - abs(self.amp))
        object.__setattr__(self, "ess_hi", self.offset + abs(self.amp))

    def eval(self, t):
        a, scalar = _as_array(t)
        out = self.offset + self.amp * np.sin(self.omega * a + self.phase)
        return float(out) if scalar else out

    def antiderivative(self, t):
        a, scalar = _as_array(t)
        out = self.offset * a - (self.amp / self.omega) * (
            np.cos(self.omega * a + self.phase) - math.cos(self.phase)
        )
        return float(out) if scalar else out

    def least_mean_exact(self):
        return self.offset


def _pc_antiderivative(knots, values, ts):
    """Antiderivative (vanishing at 0) of a piecewise-constant function.

    values[i] applies on (knots[i-1], knots[i]); values[0] before knots[0],
    values[-1] after knots[-1].  len(values) == len(knots) + 1.
    """
    ts = np.asarray(ts, dtype=float)
    cum = np.concatenate(([0.0], np.cumsum(values[1:-1] * np.diff(knots))))

    def raw(x):
        x = np.atleast_1d(x)
        idx = np.searchsorted(knots, x, side="right")
        out = np.empty_like(x)
        left = idx == 0
        right = idx == len(knots)
        mid = ~(left | right)
        out[left] = values[0] * (x[left] - knots[0])
        out[right] = cum[-1] + values[-1] * (x[right] - knots[-1])
        i = idx[mid]
        out[mid] = cum[i - 1] + values[i] * (x[mid] - knots[i - 1])
        return out

    return raw(ts) - raw(np.zeros(1))[0]


@dataclass(frozen=True)
class PiecewiseConstant(TimeSignal):
    knots: np.ndarray
    values: np.ndarray  # len(knots) + 1 entries

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(knots) <= 0):
            raise ConfigError("piecewise-constant breakpoints must be strictly increasing")
        if len(values) != len(knots) + 1:
            raise ConfigError("need one more value than breakpoints")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ess_lo", float(values.min()))
        object.__setattr__(self, "ess_hi", float(values.max()))

    def eval(self, t):
        a, scalar = _as_array(t)
        idx = np.searchsorted(self.knots, np.atleast_1d(a), side="right")
        out = self.values[idx]
        return float(out[0]) if scalar else out.reshape(a.shape)

    def antiderivative(self, t):
        a, scalar = _as_array(t)
        out = _pc_antiderivative(self.knots, self.values, np.atleast_1d(a))
        return float(out[0]) if scalar else out.reshape(a.shape)

    def breakpoints(self, a, b):
        k = self.knots
        return k[(k > a) & (k < b)]


@dataclass(frozen=True)
class BlockRandom(TimeSignal):
    """iid values on unit-length blocks plus a seeded phase offset in [0, 1).

    The value on block k is a pure function of (seed, k), so evaluation is
    reproducible and time shifts act exactly on realizations.
    """

    dist: str  # "uniform" or "degenerate"
    lo: float
    hi: float
    seed: int
    block: float = 1.0

    def __post_init__(self):
        if self.dist not in ("uniform", "degenerate"):
            raise ConfigError(f"unknown block distribution {self.dist!r}")
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(_PHASE_KEY,))
        )
        object.__setattr__(self, "_phase", float(rng.random()))
        object.__setattr__(self, "_cache", {})
        object.__setattr__(self, "ess_lo", min(self.lo, self.hi))
        object.__setattr__(self, "ess_hi", max(self.lo, self.hi))

    @property
    def phase(self):
        return self._phase

    def block_index(self, t):
        return np.floor(np.asarray(t, dtype=float) / self.block + self._phase).astype(np.int64)

    def block_value(self, k):
        k = int(k)
        cached = self._cache.get(k)
        if cached is not None:
            return cached
        if self.dist == "degenerate":
            v = self.lo
        else:
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=self.seed, spawn_key=(_VALUE_KEY, k + _KEY_OFFSET))
            )
            v = self.lo + (self.hi - self.lo) * float(rng.random())
        self._cache[k] = v
        return v

    def _values_for(self, k0, k1):
        return np.array([self.block_value(k) for k in range(int(k0), int(k1) + 1)])

    def eval(self, t):
        a, scalar = _as_array(t)
        ks = self.block_index(np.atleast_1d(a))
        out = np.array([self.block_value(k) for k in ks])
        return float(out[0]) if scalar else out.reshape(a.shape)

    def antiderivative(self, t):
        a, scalar = _as_array(t)
        flat = np.atleast_1d(a)
        lo = min(float(flat.min()), 0.0)
        hi = max(float(flat.max()), 0.0)
        k0, k1 = int(self.block_index(lo)), int(self.block_index(hi))
        # realize the covered blocks (one extra on each side) piecewise
        knots = (np.arange(k0, k1 + 2) - self._phase) * self.block
        vals = self._values_for(k0 - 1, k1 + 1)
        out = _pc_antiderivative(knots, vals, flat)
        return float(out[0]) if scalar else out.reshape(a.shape)

    def breakpoints(self, a, b):
        k0 = math.ceil(a / self.block + self._phase)
        k1 = math.floor(b / self.block + self._phase)
        pts = (np.arange(k0, k1 + 1) - self._phase) * self.block
        return pts[(pts > a) & (pts < b)]

    def least_mean_exact(self):
        # arbitrarily long runs of near-minimal blocks occur a.s.
        return self.ess_lo


@dataclass(frozen=True)
class AsymptoticSwitch(TimeSignal):
    """Smooth switch from v_past (t -> -inf) to v_future (t -> +inf)."""

    v_past: float
    v_future: float
    timescale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ess_lo", min(self.v_past, self.v_future))
        object.__setattr__(self, "ess_hi", max(self.v_past, self.v_future))

    def eval(self, t):
        a, scalar = _as_array(t)
        s = 0.5 * (1.0 + np.tanh(a / self.timescale))
        out = self.v_past + (self.v_future - self.v_past) * s
        return float(out) if scalar else out

    def antiderivative(self, t):
        a, scalar = _as_array(t)
        tau = self.timescale
        # antiderivative of (1 + tanh(x/tau))/2 is (x + tau*logcosh(x/tau))/2
        logcosh = np.logaddexp(a / tau, -a / tau) - math.log(2.0)
        prim = 0.5 * (a + tau * logcosh)
        out = self.v_past * a + (self.v_future - self.v_past) * prim
        return float(out) if scalar else out

    def least_mean_exact(self):
        return min(self.v_past, self.v_future)


@dataclass(frozen=True)
class Affine(TimeSignal):
    """scale * base(t) + offset"""

    base: TimeSignal
    scale: float
    offset: float

    def __post_init__(self):
        lo = self.scale * self.base.ess_lo + self.offset
        hi = self.scale * self.base.ess_hi + self.offset
        object.__setattr__(self, "ess_lo", min(lo, hi))
        object.__setattr__(self, "ess_hi", max(lo, hi))

    def eval(self, t):
        return self.scale * self.base.eval(t) + self.offset

    def antiderivative(self, t):
        a, scalar = _as_array(t)
        out = self.scale * np.asarray(self.base.antiderivative(t)) + self.offset * a
        return float(out) if scalar else out

    def breakpoints(self, a, b):
        return self.base.breakpoints(a, b)

    def least_mean_exact(self):
        if self.scale < 0:
            return None
        lm = self.base.least_mean_exact()
        return None if lm is None else self.scale * lm + self.offset


@dataclass(frozen=True)
class Shifted(TimeSignal):
    """base(t + shift); exact on realizations, not just in law."""

    base: TimeSignal
    shift: float

    def __post_init__(self):
        object.__setattr__(self, "ess_lo", self.base.ess_lo)
        object.__setattr__(self, "ess_hi", self.base.ess_hi)

    def eval(self, t):
        a, scalar = _as_array(t)
        return self.base.eval(a + self.shift)

    def antiderivative(self, t):
        a, scalar = _as_array(t)
        out = np.asarray(self.base.antiderivative(a + self.shift)) - self.base.antiderivative(
            self.shift
        )
        return float(out) if scalar else out

    def breakpoints(self, a, b):
        return np.asarray(self.base.breakpoints(a + self.shift, b + self.shift)) - self.shift

    def least_mean_exact(self):
        return self.base.least_mean_exact()

    def shifted(self, s):
        return self.base.shifted(self.shift + s)


def no_uniform_mean_signal(n_stages=5, lo=1.0, mid=2.0, hi=3.0):
    """Piecewise-constant signal whose windowed means never settle.

    Stage n carries a high excursion of length n immediately followed by a
    low one of the same length, separated from the next stage by an
    exponentially growing stretch at the middle value.  The running Cesaro
    mean tends to `mid` while the lower/upper least means are `lo`/`hi`.
    """
    knots = []
    values = [mid]
    t_n = 2.0
    for n in range(1, n_stages + 1):
        sigma = t_n + n
        tau = sigma + n
        knots += [t_n, sigma, tau]
        values += [hi, lo, mid]
        t_n = tau + 2.0**n
    return PiecewiseConstant(np.array(knots), np.array(values))


@dataclass
class LeastMeanReport:
    lower_least_mean: float
    upper_mean: float
    domain: str
    window_table: list  # of (T, inf_window_mean, sup_window_mean)
    horizon: float
    stride_divisor: int = 64

    def best_window(self, rel_tol=0.05):
        """Smallest window length whose inf-mean is within rel_tol of the estimate."""
        target = self.lower_least_mean
        for T, lo, _ in self.window_table:
            if abs(lo - target) <= rel_tol * max(abs(target), 1e-12):
                return T
        return self.window_table[-1][0]


def default_window_schedule(horizon):
    sched = []
    T = 1.0
    while T <= horizon / 4:
        sched.append(T)
        T *= 2
    return sched or [horizon / 4]


def least_mean(sig, domain="whole-line", window_schedule=None, horizon=256.0,
               stride_divisor=64):
    """Windowed-mean scan estimating the lower least mean and the upper mean.

    For each window length T the start times run over the signal's
    breakpoints plus a uniform grid of stride T/stride_divisor; window means
    use exact integration.  The lower estimate is the maximum over the
    schedule of the inf-window-mean (the sup over T is approached from
    below), the upper one is the symmetric min of sup-window-means.
    """
    if window_schedule is None:
        window_schedule = default_window_schedule(horizon)
    window_schedule = list(window_schedule)
    if not window_schedule:
        raise ConfigError("window schedule must be nonempty")
    if any(b <= a for a, b in zip(window_schedule, window_schedule[1:])):
        raise ConfigError("window schedule must be increasing")
    if horizon < max(window_schedule):
        raise ConfigError("horizon must cover the largest window")
    if domain == "whole-line":
        t0, t1 = -float(horizon), float(horizon)
    elif domain == "positive-half-line":
        t0, t1 = 0.0, float(horizon)
    else:
        raise ConfigError(f"unknown domain {domain!r}")

    table = []
    for T in window_schedule:
        starts = np.arange(t0, t1 - T + 1e-12, T / stride_divisor)
        bps = np.asarray(sig.breakpoints(t0, t1 - T))
        if bps.size:
            starts = np.union1d(starts, bps)
        means = (np.asarray(sig.antiderivative(starts + T))
                 - np.asarray(sig.antiderivative(starts))) / T
        if not np.all(np.isfinite(means)):
            raise NumericalError("non-finite window mean")
        table.append((float(T), float(means.min()), float(means.max())))

    lower = max(row[1] for row in table)
    upper = min(row[2] for row in table)
    return LeastMeanReport(lower, upper, domain, table, float(horizon), stride_divisor)


@dataclass
class Corrector:
    """Bounded piecewise-W^{1,inf} corrector for a signal B.

    A(t) = shift + integral from 0 to t of (-B(s) + beta_{k(s)}) ds, where
    beta_k is the mean of B over the k-th block [(k-1)T, kT).  Then
    A' + B = beta_k blockwise, A returns to `shift` at every block boundary
    and |A - shift| <= 2 T ||B||_inf.
    """

    signal: TimeSignal
    block_length: float
    shift: float
    k_range: tuple  # inclusive block index range the report fields cover
    block_means: np.ndarray
    ess_inf_residual: float
    sup_norm: float

    def block_index(self, t):
        # block k covers [(k-1)T, kT)
        return np.floor(np.asarray(t, dtype=float) / self.block_length).astype(np.int64) + 1

    def block_mean(self, k):
        T = self.block_length
        v = self.signal.integral((k - 1) * T, k * T) / T
        if not math.isfinite(v):
            raise NumericalError(f"non-finite block mean on block {k}")
        return v

    def residual(self, t):
        """A'(t) + B(t), i.e. beta_k at the block containing t."""
        ks = np.atleast_1d(self.block_index(t))
        k0 = self.k_range[0]
        out = np.empty(len(ks))
        for i, k in enumerate(ks):
            if self.k_range[0] <= k <= self.k_range[1]:
                out[i] = self.block_means[k - k0]
            else:
                out[i] = self.block_mean(int(k))
        return float(out[0]) if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    def eval(self, t):
        a, scalar = _as_array(t)
        flat = np.atleast_1d(a).ravel()
        ks = self.block_index(flat)
        beta = np.asarray(self.residual(flat))
        start = (ks - 1) * self.block_length
        out = (self.shift + beta * (flat - start)
               - (np.asarray(self.signal.antiderivative(flat))
                  - np.asarray(self.signal.antiderivative(start))))
        return float(out[0]) if scalar else out.reshape(a.shape)

    __call__ = eval

    def samples(self, t_lo, t_hi, per_block=32):
        """Piecewise-linear representation of A on [t_lo, t_hi]."""
        n = max(2, int((t_hi - t_lo) / self.block_length * per_block))
        ts = np.linspace(t_lo, t_hi, n + 1)
        bps = np.asarray(self.signal.breakpoints(t_lo, t_hi))
        if bps.size:
            ts = np.union1d(ts, bps)
        return ts, self.eval(ts)


def build_corrector(B, T, n_blocks=None, shift=0.0, domain=None):
    """Blockwise corrector for B; report fields cover `domain` or [0, n_blocks*T)."""
    if T <= 0:
        raise ConfigError("block length must be positive")
    if domain is None:
        if n_blocks is None:
            raise ConfigError("need n_blocks or an explicit domain")
        domain = (0.0, n_blocks * T)
    k0 = int(math.floor(domain[0] / T)) + 1
    k1 = int(math.ceil(domain[1] / T))
    k1 = max(k1, k0)
    means = np.empty(k1 - k0 + 1)
    for i, k in enumerate(range(k0, k1 + 1)):
        v = B.integral((k - 1) * T, k * T) / T
        if not math.isfinite(v):
            raise NumericalError(f"non-finite block mean on block {k}")
        means[i] = v

    corr = Corrector(
        signal=B,
        block_length=T,
        shift=shift,
        k_range=(k0, k1),
        block_means=means,
        ess_inf_residual=float(means.min()),
        sup_norm=0.0,
    )
    ts, vals = corr.samples(domain[0], domain[1])
    corr.sup_norm = float(np.max(np.abs(vals - shift)))
    return corr
