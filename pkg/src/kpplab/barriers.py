"""Sub- and supersolution machinery for time-heterogeneous KPP fronts.

Everything here is built from the linearization signal mu(t) = f_u(t, 0):
the speed law pairing a target least-mean speed gamma with a decay rate
kappa, exponential barrier pairs sandwiching a transition front, a compactly
supported bump profile, a compactly supported subsolution riding at a
prescribed sub-critical speed, and the moving exponential supersolutions
whose envelope caps spreading from compactly supported data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ConstructionError, RejectionError
from .reactions import Reaction
from .signals import Affine, TimeSignal, build_corrector, least_mean

EXP_CLIP = 700.0


def _exp(x):
    return np.exp(np.clip(x, -EXP_CLIP, EXP_CLIP))


# ---------------------------------------------------------------------------
# speed law


@dataclass
class SpeedLaw:
    """Decay rate kappa and instantaneous speed c(t) = kappa + mu(t)/kappa.

    The least mean of c is gamma = kappa + mu_lower/kappa; kappa is the
    smaller root of kappa^2 - gamma*kappa + mu_lower = 0, so gamma must
    exceed 2*sqrt(mu_lower).
    """

    gamma: float
    kappa: float
    kappa2: float
    mu_lower: float
    speed: TimeSignal

    def check_least_mean(self, horizon=256.0, window_schedule=None):
        """Windowed estimate of the least mean of c, for diagnostics."""
        return least_mean(self.speed, horizon=horizon, window_schedule=window_schedule)


def build_speed(mu, gamma, mu_lower=None):
    """Pair a target least-mean speed gamma with its decay rate.

    `mu_lower` overrides the estimated least mean of mu when an exact value
    is available (periodic or block-random signals know theirs).  Speeds at
    or below 2*sqrt(mu_lower) admit no such front and are rejected.
    """
    if mu_lower is None:
        mu_lower = mu.least_mean_exact()
    if mu_lower is None:
        mu_lower = least_mean(mu).lower_least_mean
    if mu_lower <= 0:
        raise ConstructionError("least mean of the linearization must be positive")
    gamma_min = 2.0 * math.sqrt(mu_lower)
    if gamma <= gamma_min:
        raise RejectionError(
            f"no front with least-mean speed {gamma}: admissible speeds exceed "
            f"{gamma_min:.6g}"
        )
    kappa = (gamma - math.sqrt(gamma * gamma - 4.0 * mu_lower)) / 2.0
    kappa2 = mu_lower / kappa
    speed = Affine(mu, 1.0 / kappa, kappa)
    return SpeedLaw(gamma=gamma, kappa=kappa, kappa2=kappa2, mu_lower=mu_lower,
                    speed=speed)


# ---------------------------------------------------------------------------
# exponential barrier pair in the moving frame z = x - X(t), X' = c(t)


@dataclass
class BarrierPair:
    """phibar(z) = min(e^{-kappa z}, 1) over phiunder(z,t) = (e^{-kappa z} - e^{A(t) - h z})_+.

    A is a bounded corrector making each a sub/supersolution of the
    profile-frame equation; the pair pins both the decay rate and a
    uniformly positive interface.
    """

    law: SpeedLaw
    reaction: Reaction
    h: float
    corrector: object
    block_length: float
    residual_floor: float  # min block mean of the drift signal B
    a_min: float
    a_max: float
    xi_anchor: float  # right end of the interval where the pair can cross
    domain: tuple

    @property
    def kappa(self):
        return self.law.kappa

    def upper(self, z):
        return np.minimum(_exp(-self.kappa * np.asarray(z, dtype=float)), 1.0)

    def lower(self, z, t):
        z = np.asarray(z, dtype=float)
        A = self.corrector.eval(t)
        return np.maximum(_exp(-self.kappa * z) - _exp(A - self.h * z), 0.0)

    def crossing(self, t):
        """Left edge of the subsolution's support at time t."""
        return self.corrector.eval(t) / (self.h - self.kappa)

    def ratio_defect(self, z, t, tau):
        """|phibar(z + tau) / phiunder(z, t) - e^{-kappa tau}|, -> 0 as z -> inf."""
        lo = self.lower(z, t)
        return np.abs(self.upper(np.asarray(z) + tau) / lo - math.exp(-self.kappa * tau))

    def supersolution_defect(self, z, t):
        """phibar_t - phibar_zz - c phibar_z - f(t, phibar), >= 0 where smooth."""
        z = np.asarray(z, dtype=float)
        c = self.law.speed.eval(t)
        u = self.upper(z)
        k = self.kappa
        # on the flank -k^2 + c k = mu(t), so f <= mu*u gives a nonnegative
        # defect there; at the plateau u = 1 the defect is -f(t, 1) = 0
        return np.where(
            z > 0.0,
            (-(k * k) + c * k) * u - np.asarray(self.reaction.eval(t, u)),
            -np.asarray(self.reaction.eval(t, np.ones_like(z))),
        )

    def subsolution_defect(self, z, t):
        """phiunder_t - phiunder_zz - c phiunder_z - f(t, phiunder) on the support.

        Nonpositive wherever the subsolution is positive; NaN off-support.
        """
        z = np.asarray(z, dtype=float)
        c = self.law.speed.eval(t)
        A = self.corrector.eval(t)
        Ap = self.corrector.residual(t) - self.corrector.signal.eval(t)
        k, h = self.kappa, self.h
        e1 = _exp(-k * z)
        e2 = _exp(A - h * z)
        val = e1 - e2
        lin = (-k * k + c * k) * e1 + (h * h - c * h - Ap) * e2
        defect = lin - np.asarray(self.reaction.eval(t, np.clip(val, 0.0, 1.0)))
        return np.where(val > 0.0, defect, np.nan)


def _pick_block_length(mu, h, kappa, domain, hint=None):
    """Smallest block length whose block means of mu all clear h*kappa."""
    span = domain[1] - domain[0]
    T = hint if hint is not None else 1.0
    while T <= span:
        corr = build_corrector(Affine(mu, 1.0, -h * kappa), T, domain=domain)
        if corr.ess_inf_residual > 0.0:
            return T
        T *= 2.0
    raise ConstructionError(
        "no block length within the domain makes all block means of the "
        "linearization exceed h*kappa"
    )


def build_barriers(reaction, gamma, domain=(-200.0, 200.0), block_length=None,
                   mu_lower=None):
    """Construct the sandwiching pair for a target least-mean speed gamma."""
    law = build_speed(reaction.mu, gamma, mu_lower=mu_lower)
    kappa = law.kappa
    h_cap = min((1.0 + reaction.gamma_exp) * kappa, law.kappa2)
    if h_cap <= kappa * (1.0 + 1e-12):
        raise ConstructionError(
            "no admissible secondary rate: need (1+gamma_exp)*kappa and "
            "mu_lower/kappa both above kappa"
        )
    h = 0.5 * (kappa + h_cap)
    T = _pick_block_length(reaction.mu, h, kappa, domain, hint=block_length)

    # drift of the e^{A - h z} term: B(t) = (h-kappa)*(mu(t)/kappa - h)
    B = Affine(reaction.mu, (h - kappa) / kappa, -h * (h - kappa))
    corr0 = build_corrector(B, T, domain=domain)
    m = corr0.ess_inf_residual
    if m <= 0:
        raise ConstructionError("block means of the barrier drift must be positive")

    # raise A until all three pointwise constraints hold:
    #   e^A >= C/m (reaction error domination), value at the support edge
    #   <= delta (so the lower KPP bound applies), and A >= 0
    needed = max(
        0.0,
        math.log(reaction.C / m),
        (h - kappa) / kappa * math.log(1.0 / reaction.delta),
    )
    ts, a_vals = corr0.samples(domain[0], domain[1], per_block=64)
    shift = needed - float(a_vals.min())
    corr = build_corrector(B, T, shift=shift, domain=domain)
    a_vals = a_vals + shift
    a_min, a_max = float(a_vals.min()), float(a_vals.max())

    return BarrierPair(
        law=law,
        reaction=reaction,
        h=h,
        corrector=corr,
        block_length=T,
        residual_floor=m,
        a_min=a_min,
        a_max=a_max,
        xi_anchor=a_max / (h - kappa) + 1.0,
        domain=tuple(domain),
    )


# ---------------------------------------------------------------------------
# compactly supported bump profile


def _blend(s, s0):
    """Quintic C^2 cutoff: 1 on (-inf, s0], 0 on [1, inf)."""
    w = np.clip((np.asarray(s, dtype=float) - s0) / (1.0 - s0), 0.0, 1.0)
    return 1.0 - w**3 * (10.0 - 15.0 * w + 6.0 * w * w)


def _blend_p(s, s0):
    width = 1.0 - s0
    w = np.clip((np.asarray(s, dtype=float) - s0) / width, 0.0, 1.0)
    inside = (s > s0) & (s < 1.0)
    return np.where(inside, -30.0 * w * w * (1.0 - w) ** 2 / width, 0.0)


def _blend_pp(s, s0):
    width = 1.0 - s0
    w = np.clip((np.asarray(s, dtype=float) - s0) / width, 0.0, 1.0)
    inside = (s > s0) & (s < 1.0)
    return np.where(inside, -60.0 * w * (1.0 - w) * (1.0 - 2.0 * w) / width**2, 0.0)


@dataclass
class BumpProfile:
    """Nondecreasing C^2 profile h: 0 at 0, 1 beyond r, with a h'' - q h' + c h > 0.

    The inequality holds on (0, r) for every admissible coefficient triple
    0 < a <= beta, 0 <= q <= sigma, 4ac - q^2 >= theta, which is what makes
    e^{A(t)} h(R - |x| + gamma t) a subsolution after time-rescaling.
    The shape is the power core (eps*rho)^n blended into the plateau 1 by a
    quintic cutoff; the core exponent must exceed 1 + sigma^2/theta or the
    worst admissible drift defeats the core's log-convexity.
    """

    beta: float
    sigma: float
    theta: float
    n: int
    s0: float  # cutoff onset, where the core has already reached 1/2
    eps: float
    r: float
    margin: float  # calibrated min of the worst-case operator value

    def _pieces(self, rho):
        rho = np.asarray(rho, dtype=float)
        s = np.clip(self.eps * rho, 0.0, 1.0)
        return rho, s, _blend(s, self.s0), _blend_p(s, self.s0), _blend_pp(s, self.s0)

    def value(self, rho):
        rho, s, chi, chip, chipp = self._pieces(rho)
        # (1 - chi) + chi*s^n, not 1 - chi*(1 - s^n): the latter rounds to 0
        # for s^n below machine precision
        core = (1.0 - chi) + chi * s**self.n
        return np.where(rho <= 0.0, 0.0, np.where(rho >= self.r, 1.0, core))

    def prime(self, rho):
        rho, s, chi, chip, chipp = self._pieces(rho)
        n = self.n
        core = self.eps * (-chip * (1.0 - s**n) + chi * n * s ** (n - 1))
        return np.where((rho <= 0.0) | (rho >= self.r), 0.0, core)

    def second(self, rho):
        rho, s, chi, chip, chipp = self._pieces(rho)
        n = self.n
        core = self.eps**2 * (
            -chipp * (1.0 - s**n) + 2.0 * chip * n * s ** (n - 1)
            + chi * n * (n - 1) * s ** (n - 2)
        )
        return np.where((rho <= 0.0) | (rho >= self.r), 0.0, core)

    def operator_value(self, a, q, c, rho):
        """a h'' - q h' + c h, positive on (0, r) for admissible (a, q, c)."""
        return a * self.second(rho) - q * self.prime(rho) + c * self.value(rho)

    def worst_operator_value(self, rho):
        """Exact pointwise min of a h'' - q h' + c h over the admissible set."""
        return _worst_operator(self.value(rho), self.prime(rho), self.second(rho),
                               self.beta, self.sigma, self.theta)

    __call__ = value


def _worst_operator(h, hp, hpp, beta, sigma, theta):
    """min over 0 < a <= beta, 0 <= q <= sigma, 4ac - q^2 >= theta of
    a h'' - q h' + c h, taken pointwise for positive h.

    c only helps, so c = (theta + q^2)/(4a); the q-optimum is 2a h'/h
    clipped to [0, sigma]; each q-branch is alpha*a + gamma/a in a with
    gamma = theta h / 4 > 0, minimized in closed form on its interval.
    """
    h = np.asarray(h, dtype=float)
    hp = np.asarray(hp, dtype=float)
    hpp = np.asarray(hpp, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a_c = np.where(hp > 0, sigma * h / (2.0 * hp), np.inf)

        def branch_min(alpha, offset, gamma, a_lo, a_hi):
            # min of alpha*a + offset + gamma/a on [a_lo, a_hi], empty -> inf
            a_star = np.where(alpha > 0, np.sqrt(gamma / np.maximum(alpha, 1e-300)),
                              np.inf)
            a_best = np.clip(a_star, a_lo, a_hi)
            val = alpha * a_best + offset + gamma / a_best
            return np.where(a_hi >= a_lo, val, np.inf)

        tiny = 1e-12 * beta
        # branch with the interior q-optimum (valid while 2a h'/h <= sigma)
        v1 = branch_min(hpp - np.where(h > 0, hp * hp / np.maximum(h, 1e-300), 0.0),
                        0.0, theta * h / 4.0, tiny, np.minimum(a_c, beta))
        # branch pinned at q = sigma
        v2 = branch_min(hpp, -sigma * hp, (theta + sigma * sigma) * h / 4.0,
                        np.minimum(a_c, beta), beta)
        # branch pinned at q = 0 (only relevant if h' = 0, covered by v1 too)
        v3 = branch_min(hpp, 0.0, theta * h / 4.0, tiny, beta)
    return np.minimum(v1, np.minimum(v2, v3))


def halton_triples(n, beta, sigma, theta, margin=1.0):
    """n low-discrepancy admissible triples (a, q, c).

    Coordinates map the unit cube onto 0 < a <= beta, 0 <= q <= sigma and
    c between its admissible floor (theta + q^2)/(4a) and `margin` times
    more; raising c only strengthens the operator, so the floor is the
    hard edge to cover.
    """
    from scipy.stats import qmc

    pts = qmc.Halton(d=3, seed=0).random(int(n))
    out = []
    for x1, x2, x3 in pts:
        a = beta * (0.01 + 0.99 * x1)
        q = sigma * x2
        c = (theta + q * q) / (4.0 * a) * (1.0 + margin * x3)
        out.append((a, q, c))
    return out


def build_bump(beta, sigma, theta, n_calib=20001):
    """Calibrate the bump for coefficient bounds (beta, sigma, theta).

    The width 1/eps is doubled (eps halved) until the exact worst-case
    operator value is strictly positive on a dense interior grid.
    """
    if beta <= 0 or sigma < 0 or theta <= 0:
        raise ConfigError("need beta > 0, sigma >= 0, theta > 0")
    n = max(3, int(math.ceil((theta + sigma * sigma) / theta)) + 1)
    s0 = 2.0 ** (-1.0 / n)

    eps = 0.25
    for _ in range(60):
        bump = BumpProfile(beta=beta, sigma=sigma, theta=theta, n=n, s0=s0,
                           eps=eps, r=1.0 / eps, margin=0.0)
        rho = bump.r * np.linspace(0.0, 1.0, n_calib + 2)[1:-1]
        worst = bump.worst_operator_value(rho)
        m = float(worst.min())
        if m > 0.0:
            bump.margin = m
            return bump
        eps *= 0.5
    raise ConstructionError("bump calibration did not converge")


# ---------------------------------------------------------------------------
# compactly supported subsolution moving at a prescribed sub-critical speed


@dataclass
class CompactSubsolution:
    """v(x, t) = scale * e^{A(t)} * h(R - |x| + gamma_run * t) on [0, eta*T].

    Subsolution of w_t - Lap w = g(t) w whenever every block mean of g over
    length-T blocks clears (gamma_star/2)^2 with gamma_star > gamma_run; it
    stays >= floor_value on the cone |x| <= gamma_run * t.
    """

    g: TimeSignal
    block_length: float
    n_blocks: int
    gamma_run: float
    gamma_star: float
    dim: int
    bump: BumpProfile
    R: float
    Q: float
    corrector: object  # corrector of 4 g - Q^2; A = -corrector/4
    scale: float
    floor_value: float
    a_min: float
    a_max: float

    def A(self, t):
        return -np.asarray(self.corrector.eval(t)) / 4.0

    def eval(self, x, t):
        x = np.asarray(x, dtype=float)
        rho = self.R - np.abs(x) + self.gamma_run * np.asarray(t, dtype=float)
        return self.scale * _exp(self.A(t)) * self.bump.value(rho)

    __call__ = eval

    def defect(self, x, t):
        """v_t - Lap v - g v; nonpositive on the open support."""
        x = np.asarray(x, dtype=float)
        t = float(t)
        rho = self.R - np.abs(x) + self.gamma_run * t
        h = self.bump.value(rho)
        hp = self.bump.prime(rho)
        hpp = self.bump.second(rho)
        A = float(self.A(t))
        Ap = -(self.corrector.residual(t) - self.corrector.signal.eval(t)) / 4.0
        g_t = self.g.eval(t)
        lap = hpp
        if self.dim > 1:
            r = np.maximum(np.abs(x), 1e-300)
            lap = hpp - (self.dim - 1) / r * hp
        val = self.scale * _exp(A) * (
            (Ap - g_t) * h + self.gamma_run * hp - lap
        )
        return np.where(h > 0.0, val, np.nan)


def build_compact_subsolution(g, block_length, n_blocks, gamma_run, dim=1):
    """Build the runner for growth signal g over the window [0, n_blocks*T]."""
    if gamma_run <= 0:
        raise ConfigError("gamma_run must be positive")
    T = float(block_length)
    means = np.array([g.integral((k - 1) * T, k * T) / T for k in range(1, n_blocks + 1)])
    if np.any(means <= 0):
        raise ConstructionError("every block mean of g must be positive")
    gamma_star = float(2.0 * np.sqrt(means.min()))
    if gamma_star <= gamma_run:
        raise ConstructionError(
            f"gamma_run {gamma_run} must stay below the admissible ceiling "
            f"{gamma_star:.6g}"
        )

    theta = 0.5 * (gamma_star - gamma_run) ** 2
    bump = build_bump(1.0, gamma_run + 1.0, theta)

    # widen the support until the drift penalty (dim-1)/(R-r) fits the margin
    R = bump.r + 1.0
    while True:
        Q = gamma_run + (dim - 1) / (R - bump.r)
        if Q <= gamma_run + 1.0 and gamma_star**2 - Q * Q >= theta:
            break
        R += 1.0
        if R > bump.r + 1e6:
            raise ConstructionError("support radius search failed")

    B = Affine(g, 4.0, -Q * Q)
    corr = build_corrector(B, T, domain=(0.0, n_blocks * T))
    if corr.ess_inf_residual <= 0:
        raise ConstructionError("block means of 4g - Q^2 must be positive")
    ts, vals = corr.samples(0.0, n_blocks * T, per_block=64)
    a_vals = -vals / 4.0
    a_min, a_max = float(a_vals.min()), float(a_vals.max())

    return CompactSubsolution(
        g=g, block_length=T, n_blocks=n_blocks, gamma_run=gamma_run,
        gamma_star=gamma_star, dim=dim, bump=bump, R=R, Q=Q, corrector=corr,
        scale=math.exp(-a_max), floor_value=math.exp(a_min - a_max),
        a_min=a_min, a_max=a_max,
    )


# ---------------------------------------------------------------------------
# moving exponential supersolutions and their Gaussian-in-space envelope


@dataclass
class MovingExponentialSupersolution:
    """v(x, t) = exp(-kappa(|x| - R - kappa t) + int_0^t mu) caps spread from
    data supported in |x| <= R; the pointwise infimum over kappa > 0 is the
    envelope exp(-(|x| - R)^2 / (4t) + int_0^t mu)."""

    mu: TimeSignal
    R: float

    def eval(self, x, t, kappa):
        if kappa <= 0:
            raise ConfigError("kappa must be positive")
        x = np.asarray(x, dtype=float)
        grow = np.asarray(self.mu.antiderivative(t))
        return _exp(-kappa * (np.abs(x) - self.R - kappa * t) + grow)

    def envelope(self, x, t):
        if t <= 0:
            raise ConfigError("the envelope needs t > 0")
        x = np.asarray(x, dtype=float)
        grow = np.asarray(self.mu.antiderivative(t))
        gap = np.maximum(np.abs(x) - self.R, 0.0)
        return _exp(-gap * gap / (4.0 * t) + grow)

    def best_kappa(self, x, t):
        """Optimizer of the exponent at (x, t): (|x| - R) / (2t) where positive."""
        x = np.asarray(x, dtype=float)
        return np.maximum(np.abs(x) - self.R, 0.0) / (2.0 * t)
