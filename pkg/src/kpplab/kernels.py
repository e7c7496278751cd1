"""Time-stepping kernels: one IMEX Crank-Nicolson step in two implementations.

The step advances u_t = L u + f(t, u) where L is a tridiagonal operator
(diffusion plus a centered first-order term) with rows (lo, di, up), the
reaction is explicit at the substep midpoint, and the diffusion half is
implicit.  Boundary rows flagged in `fixed_mask` are held at `fixed_val`.

The numba implementation fuses the right-hand side, the pointwise reaction,
and the Thomas solve into one compiled loop; the numpy implementation uses
vectorized arrays and scipy's banded solver.  Selection: numba when
importable unless the environment variable KPPLAB_NUMBA is set to
0/false/off.

Reaction codes (params is a 3-vector evaluated at the substep midpoint):
  0  logistic           f = p0 * u * (1 - u)
  1  cubic              f = u * (1 - u) * (u + p0)
  2  tabulated combo    f = F(u) + p0 * P(u), slopes p1 at 0 and p2 at 1,
                        F and P sampled on a uniform grid over [0, 1]
Outside [0, 1] every code continues linearly with the slopes at 0 and 1.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.linalg import solve_banded

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag instead
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def _numba_enabled():
    flag = os.environ.get("KPPLAB_NUMBA", "").strip().lower()
    if flag in ("0", "false", "off", "no"):
        return False
    return HAVE_NUMBA


USE_NUMBA = _numba_enabled()


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy path


def _react_numpy(code, params, tbl_f, tbl_p, u):
    p0, p1, p2 = params[0], params[1], params[2]
    uc = np.clip(u, 0.0, 1.0)
    if code == 0:
        core = p0 * uc * (1.0 - uc)
        slope0, slope1 = p0, -p0
    elif code == 1:
        core = uc * (1.0 - uc) * (uc + p0)
        slope0, slope1 = p0, -(1.0 + p0)
    else:
        m = tbl_f.shape[0]
        pos = uc * (m - 1)
        idx = np.minimum(pos.astype(np.int64), m - 2)
        w = pos - idx
        core = (tbl_f[idx] * (1.0 - w) + tbl_f[idx + 1] * w
                + p0 * (tbl_p[idx] * (1.0 - w) + tbl_p[idx + 1] * w))
        slope0, slope1 = p1, p2
    out = np.where(u < 0.0, slope0 * u, core)
    return np.where(u > 1.0, slope1 * (u - 1.0), out)


def step_once_numpy(u, lo, di, up, dt, fixed_mask, fixed_val, code, params,
                    tbl_f, tbl_p, src):
    n = u.shape[0]
    Lu = di * u
    Lu[:-1] += up[:-1] * u[1:]
    Lu[1:] += lo[1:] * u[:-1]
    rhs = u + 0.5 * dt * Lu + dt * (_react_numpy(code, params, tbl_f, tbl_p, u)
                                    + src)
    rhs = np.where(fixed_mask, fixed_val, rhs)

    ab = np.zeros((3, n))
    ab[0, 1:] = np.where(fixed_mask[:-1], 0.0, -0.5 * dt * up[:-1])
    ab[1, :] = np.where(fixed_mask, 1.0, 1.0 - 0.5 * dt * di)
    ab[2, :-1] = np.where(fixed_mask[1:], 0.0, -0.5 * dt * lo[1:])
    return solve_banded((1, 1), ab, rhs, check_finite=False,
                        overwrite_ab=True, overwrite_b=True)


# ---------------------------------------------------------------------------
# numba path


@njit(cache=True)
def _react_scalar(code, p0, p1, p2, tbl_f, tbl_p, u):
    if u < 0.0:
        if code == 0:
            return p0 * u
        if code == 1:
            return p0 * u
        return p1 * u
    if u > 1.0:
        if code == 0:
            return -p0 * (u - 1.0)
        if code == 1:
            return -(1.0 + p0) * (u - 1.0)
        return p2 * (u - 1.0)
    if code == 0:
        return p0 * u * (1.0 - u)
    if code == 1:
        return u * (1.0 - u) * (u + p0)
    m = tbl_f.shape[0]
    pos = u * (m - 1)
    idx = int(pos)
    if idx > m - 2:
        idx = m - 2
    w = pos - idx
    return (tbl_f[idx] * (1.0 - w) + tbl_f[idx + 1] * w
            + p0 * (tbl_p[idx] * (1.0 - w) + tbl_p[idx + 1] * w))


@njit(cache=True)
def step_once_numba(u, lo, di, up, dt, fixed_mask, fixed_val, code, params,
                    tbl_f, tbl_p, src):
    n = u.shape[0]
    p0, p1, p2 = params[0], params[1], params[2]
    rhs = np.empty(n)
    a = np.empty(n)  # sub-diagonal of (I - dt/2 L)
    b = np.empty(n)  # diagonal
    c = np.empty(n)  # super-diagonal
    for i in range(n):
        Lu = di[i] * u[i]
        if i > 0:
            Lu += lo[i] * u[i - 1]
        if i < n - 1:
            Lu += up[i] * u[i + 1]
        if fixed_mask[i]:
            rhs[i] = fixed_val[i]
            a[i] = 0.0
            b[i] = 1.0
            c[i] = 0.0
        else:
            rhs[i] = u[i] + 0.5 * dt * Lu + dt * (_react_scalar(
                code, p0, p1, p2, tbl_f, tbl_p, u[i]) + src[i])
            a[i] = -0.5 * dt * lo[i]
            b[i] = 1.0 - 0.5 * dt * di[i]
            c[i] = -0.5 * dt * up[i]

    # Thomas sweep
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = c[0] / b[0]
    dp[0] = rhs[0] / b[0]
    for i in range(1, n):
        denom = b[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / denom
        dp[i] = (rhs[i] - a[i] * dp[i - 1]) / denom
    out = np.empty(n)
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return out


def step_once(u, lo, di, up, dt, fixed_mask, fixed_val, code, params,
              tbl_f, tbl_p, src):
    """One IMEX step with the backend chosen at import time.

    `src` is an explicit extra source added to the right-hand side; the
    solver uses it for truncation-error defect corrections.
    """
    if USE_NUMBA:
        return step_once_numba(u, lo, di, up, dt, fixed_mask, fixed_val,
                               code, params, tbl_f, tbl_p, src)
    return step_once_numpy(u, lo, di, up, dt, fixed_mask, fixed_val,
                           code, params, tbl_f, tbl_p, src)
