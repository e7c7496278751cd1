"""Time-heterogeneous KPP nonlinearities f(t, u).

Every reaction carries its linearization signal mu(t) = f_u(t, 0) together
with the lower-bound certificate constants (C, gamma_exp, delta) for
f >= mu*u - C*u^(1+gamma_exp) near 0.  Outside [0, 1] the reaction is
continued linearly (slope mu(t) below 0, slope f_u(t, 1) above 1) within a
fixed margin, which is all the barrier arguments need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, ConstructionError, DomainError
from .signals import Affine, Constant, TimeSignal

SQRT2 = math.sqrt(2.0)
U_EXT = 0.5  # linear extension margin outside [0, 1]

# kernel codes shared with the solver backends
KERNEL_LOGISTIC = 0
KERNEL_CUBIC = 1
KERNEL_TABLE = 2


class Reaction:
    """Base class; subclasses define the value on [0, 1] and the slope at 1."""

    kind: str
    mu: TimeSignal
    C: float
    gamma_exp: float
    delta: float

    def value_in_unit(self, t, u):
        raise NotImplementedError

    def fu_at_one(self, t):
        raise NotImplementedError

    def eval(self, t, u):
        """f(t, u) with the linear continuation outside [0, 1]."""
        u_arr = np.asarray(u, dtype=float)
        scalar = u_arr.ndim == 0 and np.asarray(t).ndim == 0
        u_arr = np.atleast_1d(u_arr)
        if np.any(u_arr < -U_EXT - 1e-12) or np.any(u_arr > 1.0 + U_EXT + 1e-12):
            raise DomainError("u outside the linear-extension margin")
        inner = self.value_in_unit(t, np.clip(u_arr, 0.0, 1.0))
        mu_t = self.mu.eval(t)
        s1 = self.fu_at_one(t)
        out = np.where(u_arr < 0.0, mu_t * u_arr, inner)
        out = np.where(u_arr > 1.0, s1 * (u_arr - 1.0), out)
        return float(out[0]) if scalar else out

    __call__ = eval

    # --- solver kernel interface -------------------------------------
    def kernel_tables(self):
        """(tbl_u, tbl_f, tbl_p) arrays for table-driven kinds, else empties."""
        z = np.zeros(2)
        return np.array([0.0, 1.0]), z, z

    def kernel_code(self):
        raise NotImplementedError

    def kernel_params(self, t):
        """Per-time scalar parameters consumed by the step kernel."""
        raise NotImplementedError


@dataclass
class Logistic(Reaction):
    """f(t, u) = mu(t) * u * (1 - u)."""

    mu: TimeSignal
    kind: str = "logistic"

    def __post_init__(self):
        self.C = self.mu.ess_hi
        self.gamma_exp = 1.0
        self.delta = 1.0

    def value_in_unit(self, t, u):
        return self.mu.eval(t) * u * (1.0 - u)

    def fu_at_one(self, t):
        return -self.mu.eval(t)

    def kernel_code(self):
        return KERNEL_LOGISTIC

    def kernel_params(self, t):
        return np.array([self.mu.eval(t), 0.0, 0.0])


@dataclass
class CubicPerturbed(Reaction):
    """f(t, u) = u(1-u)(u + alpha + xi(t)/sqrt(2)), KPP for ||xi|| < sqrt(2)(alpha-1).

    The associated travelling front 1/(1 + exp(z/sqrt(2))) rides at speed
    sqrt(2)*alpha + 1/sqrt(2) + xi(t).
    """

    alpha: float
    xi: TimeSignal
    kind: str = "cubic-perturbed"

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ConfigError("alpha must exceed 1")
        xi_sup = max(abs(self.xi.ess_lo), abs(self.xi.ess_hi))
        if xi_sup >= SQRT2 * (self.alpha - 1.0):
            raise ConfigError("perturbation too large for the KPP property")
        self.mu = Affine(self.xi, 1.0 / SQRT2, self.alpha)
        self.C = self.alpha + xi_sup / SQRT2
        self.gamma_exp = 1.0
        self.delta = 1.0

    def _atilde(self, t):
        return self.alpha + self.xi.eval(t) / SQRT2

    def value_in_unit(self, t, u):
        return u * (1.0 - u) * (u + self._atilde(t))

    def fu_at_one(self, t):
        return -(1.0 + self._atilde(t))

    def kernel_code(self):
        return KERNEL_CUBIC

    def kernel_params(self, t):
        return np.array([self._atilde(t), 0.0, 0.0])


@dataclass
class TableReaction(Reaction):
    """f(t, u) = F(u) + p(t) * P(u) with tabulated F, P on [0, 1]."""

    tbl_u: np.ndarray
    tbl_f: np.ndarray
    tbl_p: np.ndarray
    p: TimeSignal
    mu: TimeSignal
    C: float
    gamma_exp: float
    delta: float
    kind: str = "custom-tabulated"

    def __post_init__(self):
        h = self.tbl_u[-1] - self.tbl_u[-2]
        self._slope1_f = (self.tbl_f[-1] - self.tbl_f[-2]) / h
        self._slope1_p = (self.tbl_p[-1] - self.tbl_p[-2]) / h

    def value_in_unit(self, t, u):
        F = np.interp(u, self.tbl_u, self.tbl_f)
        P = np.interp(u, self.tbl_u, self.tbl_p)
        return F + self.p.eval(t) * P

    def fu_at_one(self, t):
        return self._slope1_f + self.p.eval(t) * self._slope1_p

    def kernel_code(self):
        return KERNEL_TABLE

    def kernel_tables(self):
        return self.tbl_u, self.tbl_f, self.tbl_p

    def kernel_params(self, t):
        return np.array([self.p.eval(t), self.mu.eval(t), self.fu_at_one(t)])


# ---------------------------------------------------------------------------
# exact travelling-wave oracle for the cubic family


@dataclass
class ExactWaveFamily:
    """Closed-form front for the perturbed cubic equation."""

    alpha: float
    xi: TimeSignal

    def __post_init__(self):
        if self.alpha <= 1.0:
            raise ConfigError("alpha must exceed 1")
        self.c0 = SQRT2 * self.alpha + 1.0 / SQRT2

    def profile(self, z):
        z = np.asarray(z, dtype=float)
        return 1.0 / (1.0 + np.exp(np.clip(z / SQRT2, -700, 700)))

    def profile_prime(self, z):
        U = self.profile(z)
        return -(U / SQRT2) * (1.0 - U)

    def speed(self, t):
        return self.c0 + self.xi.eval(t)

    def reaction(self):
        return CubicPerturbed(self.alpha, self.xi)

    def eval(self, x, t):
        drift = self.c0 * np.asarray(t, dtype=float) + np.asarray(self.xi.antiderivative(t))
        return self.profile(np.asarray(x, dtype=float) - drift)


def exact_wave_oracle(fam, x, t):
    """Value of the closed-form transition front at (x, t); speed c0 + xi(t)."""
    return fam.eval(x, t)


# ---------------------------------------------------------------------------
# KPP validation


@dataclass
class KppViolation:
    check: str
    t: float
    u: float
    lhs: float
    rhs: float


@dataclass
class KppCertificate:
    passed: bool
    C: float
    gamma_exp: float
    delta: float
    tol: float
    n_t: int
    n_u: int
    violations: list
    note: str = "C, gamma_exp, delta are declared by the reaction, not universal constants"


def validate_kpp(reaction, t_samples, u_samples):
    """Check the KPP hypotheses on the product grid; violations are data."""
    t_samples = np.asarray(t_samples, dtype=float)
    u_samples = np.asarray(u_samples, dtype=float)
    if t_samples.size == 0 or u_samples.size == 0:
        raise ConfigError("sample grids must be nonempty")
    mu_sup = max(abs(reaction.mu.ess_lo), abs(reaction.mu.ess_hi))
    tol = 1e-10 * (1.0 + mu_sup)
    violations = []

    for t in t_samples:
        for u_edge in (0.0, 1.0):
            v = reaction.eval(t, u_edge)
            if abs(v) > tol:
                violations.append(KppViolation("f(t,0)=f(t,1)=0", float(t), u_edge, v, 0.0))

    interior = u_samples[(u_samples > 0.0) & (u_samples < 1.0)]
    for u in interior:
        vals = np.array([reaction.eval(t, u) for t in t_samples])
        if vals.min() <= 0.0:
            i = int(vals.argmin())
            violations.append(
                KppViolation("essinf f(t,u) > 0", float(t_samples[i]), float(u), vals.min(), 0.0)
            )

    for t in t_samples:
        mu_t = reaction.mu.eval(t)
        f_vals = reaction.eval(t, u_samples) if u_samples.size > 1 else np.array(
            [reaction.eval(t, u_samples[0])]
        )
        upper = mu_t * u_samples
        bad = f_vals > upper + tol
        if np.any(bad):
            i = int(np.argmax(f_vals - upper))
            violations.append(
                KppViolation("f <= mu*u", float(t), float(u_samples[i]), f_vals[i], upper[i])
            )
        in_delta = u_samples <= reaction.delta
        lower = upper - reaction.C * u_samples ** (1.0 + reaction.gamma_exp)
        bad = in_delta & (f_vals < lower - tol)
        if np.any(bad):
            i = int(np.argmax(np.where(in_delta, lower - f_vals, -np.inf)))
            violations.append(
                KppViolation("f >= mu*u - C*u^(1+g)", float(t), float(u_samples[i]),
                             f_vals[i], lower[i])
            )

    return KppCertificate(
        passed=not violations,
        C=reaction.C,
        gamma_exp=reaction.gamma_exp,
        delta=reaction.delta,
        tol=tol,
        n_t=len(t_samples),
        n_u=len(u_samples),
        violations=violations,
    )


# ---------------------------------------------------------------------------
# homogeneous front profiles by shooting, and the pulled-perturbation family


@dataclass
class WaveProfile:
    """Monotone front profile of -U'' - c U' = f(U), normalized U(0) = 1/2."""

    c: float
    z: np.ndarray
    U: np.ndarray
    Up: np.ndarray

    def __call__(self, z):
        zq = np.asarray(z, dtype=float)
        return np.interp(zq, self.z, self.U, left=1.0, right=0.0)

    def prime(self, z):
        zq = np.asarray(z, dtype=float)
        return np.interp(zq, self.z, self.Up, left=0.0, right=0.0)


def homogeneous_wave_profile(f, fprime0, c, fprime1=None, tail=1e-12, span=400.0):
    """Shoot the profile ODE from the unstable manifold at the state 1.

    Works for any Lipschitz monostable f with c >= 2*sqrt(f'(0)); raises if
    the connection loses monotonicity.
    """
    if fprime1 is None:
        h = 1e-6
        fprime1 = (f(1.0) - f(1.0 - h)) / h
    if fprime1 >= 0:
        raise ConstructionError("state 1 must be stable (f'(1) < 0)")
    lam1 = (-c + math.sqrt(c * c - 4.0 * fprime1)) / 2.0
    eps = 1e-7

    def rhs(z, y):
        return [y[1], -c * y[1] - f(min(max(y[0], -0.5), 1.5))]

    def hit_zero(z, y):
        return y[0] - tail

    hit_zero.terminal = True
    hit_zero.direction = -1

    sol = solve_ivp(
        rhs, (0.0, span), [1.0 - eps, -lam1 * eps],
        events=hit_zero, rtol=1e-10, atol=1e-14, dense_output=True, max_step=0.5,
    )
    if not sol.t_events[0].size:
        raise ConstructionError("profile shooting did not reach the zero state")
    z_end = sol.t_events[0][0]
    z = np.linspace(0.0, z_end, 20001)
    y = sol.sol(z)
    U, Up = y[0], y[1]
    if np.any(Up > 1e-9):
        raise ConstructionError("no monotone connection found")
    # pin the translate with U = 1/2 at z = 0
    i_half = int(np.argmin(np.abs(U - 0.5)))
    z = z - z[i_half]
    return WaveProfile(c=c, z=z, U=U, Up=np.minimum(Up, 0.0))


@dataclass
class PulledReaction(TableReaction):
    """g(t, u) = f(u) + xi(t) * P(u) where P(u) is minus the profile slope.

    P'(0) = lambda_c, the smaller decay rate of the front of speed c, so the
    linearization signal of g is f'(0) + lambda_c * xi(t).
    """

    c: float = 0.0
    lambda_c: float = 0.0
    profile: WaveProfile = None
    kind: str = "pulled-perturbed"


def build_pulled_reaction(f, fprime0, c, xi, n_table=2001):
    """Tabulate P_c(u) = -U'(U^{-1}(u)) from the shot front of speed c."""
    if c < 2.0 * math.sqrt(fprime0) - 1e-12:
        raise ConstructionError("speed below the minimal front speed")
    prof = homogeneous_wave_profile(f, fprime0, c)
    lambda_c = (c - math.sqrt(max(c * c - 4.0 * fprime0, 0.0))) / 2.0

    # invert the decreasing profile by monotone interpolation
    order = np.argsort(prof.U)
    u_nodes = prof.U[order]
    p_nodes = -prof.Up[order]
    keep = np.concatenate(([True], np.diff(u_nodes) > 1e-14))
    inv = PchipInterpolator(u_nodes[keep], p_nodes[keep], extrapolate=False)

    tbl_u = np.linspace(0.0, 1.0, n_table)
    tbl_p = np.zeros(n_table)
    interior = (tbl_u > u_nodes[keep][0]) & (tbl_u < u_nodes[keep][-1])
    tbl_p[interior] = np.maximum(inv(tbl_u[interior]), 0.0)
    # pure exponential tail below the resolved range
    small = (tbl_u > 0) & ~interior & (tbl_u <= 0.5)
    tbl_p[small] = lambda_c * tbl_u[small]
    tbl_f = np.array([f(u) for u in tbl_u])
    tbl_f[0] = tbl_f[-1] = 0.0

    mu = Affine(xi, lambda_c, fprime0)
    # calibrate the lower-bound constant on the table
    lam2 = (c + math.sqrt(max(c * c - 4.0 * fprime0, 0.0))) / 2.0
    gamma_exp = min(1.0, lam2 / lambda_c - 1.0) if lam2 > lambda_c else 1.0
    delta = 0.5
    xi_sup = max(abs(xi.ess_lo), abs(xi.ess_hi))
    uu = tbl_u[(tbl_u > 0) & (tbl_u <= delta)]
    gap_f = np.array([fprime0 * u - f(u) for u in uu])
    gap_p = lambda_c * uu - np.interp(uu, tbl_u, tbl_p)
    C = float(np.max((np.abs(gap_f) + xi_sup * np.abs(gap_p)) / uu ** (1.0 + gamma_exp)))
    C = max(1.1 * C, 1e-8)

    return PulledReaction(
        tbl_u=tbl_u, tbl_f=tbl_f, tbl_p=tbl_p, p=xi, mu=mu,
        C=C, gamma_exp=gamma_exp, delta=delta,
        c=c, lambda_c=lambda_c, profile=prof, kind="pulled-perturbed",
    )


def load_tabulated_reaction(path, scale):
    """Two-column CSV (u, F(u)) scaled in time by the signal `scale`."""
    data = np.loadtxt(path, delimiter=",")
    tbl_u, tbl_f = data[:, 0], data[:, 1]
    if tbl_u[0] != 0.0 or tbl_u[-1] != 1.0 or np.any(np.diff(tbl_u) <= 0):
        raise ConfigError("tabulated u-grid must increase from 0 to 1")
    slope0 = (tbl_f[1] - tbl_f[0]) / (tbl_u[1] - tbl_u[0])
    mu = Affine(scale, slope0, 0.0)
    return TableReaction(
        tbl_u=tbl_u, tbl_f=np.zeros_like(tbl_f), tbl_p=tbl_f, p=scale, mu=mu,
        C=max(1.0, 10.0 * float(np.max(np.abs(tbl_f)))), gamma_exp=1.0, delta=1.0,
    )
