"""Exact Riemann solver for the 1D Euler equations of a polytropic gas.

States are primitive triples ``(rho, u, p)``; every routine is vectorized
over trailing axes so a whole row of faces is solved at once.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import SolverError, VacuumError
from .euler import GasModel

NEWTON_RTOL = 1e-12
MAX_ITER = 100


class RiemannFan(NamedTuple):
    """Star region and wave structure of one (or many) Riemann problems.

    ``left_shock``/``right_shock`` flag the nonlinear waves.  For a shock
    ``*_head`` and ``*_tail`` both hold the shock speed; for a rarefaction
    they hold the head and tail characteristic speeds.
    """

    p_star: np.ndarray
    u_star: np.ndarray
    rho_star_left: np.ndarray
    rho_star_right: np.ndarray
    left_shock: np.ndarray
    right_shock: np.ndarray
    left_head: np.ndarray
    left_tail: np.ndarray
    right_head: np.ndarray
    right_tail: np.ndarray


def _split(state):
    W = np.asarray(state, dtype=np.float64)
    return W[0], W[1], W[2]


def pressure_function(p, rho_k, p_k, c_k, gamma):
    """Velocity change across the ``k``-wave as a function of the star
    pressure, and its derivative."""
    g = gamma
    shock = p > p_k
    A = 2.0 / ((g + 1.0) * rho_k)
    B = (g - 1.0) / (g + 1.0) * p_k
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.sqrt(A / (p + B))
        f_s = (p - p_k) * q
        df_s = q * (1.0 - 0.5 * (p - p_k) / (p + B))
        ratio = p / p_k
        f_r = 2.0 * c_k / (g - 1.0) * (ratio ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df_r = ratio ** (-(g + 1.0) / (2.0 * g)) / (rho_k * c_k)
    return np.where(shock, f_s, f_r), np.where(shock, df_s, df_r)


def star_pressure(left, right, gas: GasModel):
    """Solve ``f_L(p) + f_R(p) + u_R - u_L = 0`` for ``(p_star, u_star)``.

    Newton iteration started from the two-rarefaction estimate; iterates
    that leave the current sign bracket are replaced by bisection.
    """
    g = gas.gamma
    rl, ul, pl = _split(left)
    rr, ur, pr = _split(right)
    cl = np.sqrt(g * pl / rl)
    cr = np.sqrt(g * pr / rr)
    du = ur - ul
    if np.any(2.0 * (cl + cr) / (g - 1.0) <= du):
        raise VacuumError("Riemann data generate vacuum")

    z = (g - 1.0) / (2.0 * g)
    p = ((cl + cr - 0.5 * (g - 1.0) * du) / (cl / pl**z + cr / pr**z)) ** (1.0 / z)
    p = np.maximum(np.asarray(p, dtype=np.float64), 1e-300)

    # f is increasing in p with f(0+) < 0 when no vacuum forms
    shape = p.shape
    p = p.ravel().copy()
    rl, pl, cl, rr, pr, cr, du = (np.broadcast_to(a, shape).ravel()
                                  for a in (rl, pl, cl, rr, pr, cr, du))

    def total(pp, k):
        fl, dfl = pressure_function(pp, rl[k], pl[k], cl[k], g)
        fr, dfr = pressure_function(pp, rr[k], pr[k], cr[k], g)
        return fl + fr + du[k], dfl + dfr

    lo = np.zeros_like(p)
    hi = np.maximum(np.maximum(pl, pr), p) * 2.0
    grow = np.arange(p.size)
    for _ in range(200):
        f_hi, _ = total(hi[grow], grow)
        grow = grow[f_hi <= 0.0]
        if grow.size == 0:
            break
        hi[grow] *= 4.0

    active = np.arange(p.size)
    for _ in range(MAX_ITER):
        pa = p[active]
        f, df = total(pa, active)
        lo_a = np.where(f < 0.0, np.maximum(lo[active], pa), lo[active])
        hi_a = np.where(f > 0.0, np.minimum(hi[active], pa), hi[active])
        with np.errstate(invalid="ignore", divide="ignore"):
            p_new = pa - f / df
        outside = ~((p_new > lo_a) & (p_new < hi_a))
        p_new = np.where(outside, 0.5 * (lo_a + hi_a), p_new)
        converged = (np.abs(p_new - pa) <= NEWTON_RTOL * 0.5 * (p_new + pa)) | (f == 0.0)
        p[active] = p_new
        lo[active] = lo_a
        hi[active] = hi_a
        active = active[~converged]
        if active.size == 0:
            break
    else:
        raise SolverError(f"star pressure did not converge in {MAX_ITER} iterations")

    p = p.reshape(shape)
    rl, pl, cl, rr, pr, cr, du = (a.reshape(shape) for a in (rl, pl, cl, rr, pr, cr, du))
    fl, _ = pressure_function(p, rl, pl, cl, g)
    fr, _ = pressure_function(p, rr, pr, cr, g)
    u = 0.5 * (ul + ur) + 0.5 * (fr - fl)
    return p, u


def riemann_fan(left, right, gas: GasModel) -> RiemannFan:
    g = gas.gamma
    rl, ul, pl = _split(left)
    rr, ur, pr = _split(right)
    cl = np.sqrt(g * pl / rl)
    cr = np.sqrt(g * pr / rr)
    ps, us = star_pressure(left, right, gas)
    gm = (g - 1.0) / (g + 1.0)

    lshock = ps > pl
    with np.errstate(invalid="ignore", divide="ignore"):
        rho_sl_shock = rl * (ps / pl + gm) / (gm * ps / pl + 1.0)
        rho_sl_rare = rl * (ps / pl) ** (1.0 / g)
        sl = ul - cl * np.sqrt((g + 1.0) / (2.0 * g) * ps / pl + (g - 1.0) / (2.0 * g))
        c_sl = cl * (ps / pl) ** ((g - 1.0) / (2.0 * g))

    rshock = ps > pr
    with np.errstate(invalid="ignore", divide="ignore"):
        rho_sr_shock = rr * (ps / pr + gm) / (gm * ps / pr + 1.0)
        rho_sr_rare = rr * (ps / pr) ** (1.0 / g)
        sr = ur + cr * np.sqrt((g + 1.0) / (2.0 * g) * ps / pr + (g - 1.0) / (2.0 * g))
        c_sr = cr * (ps / pr) ** ((g - 1.0) / (2.0 * g))

    return RiemannFan(
        p_star=ps,
        u_star=us,
        rho_star_left=np.where(lshock, rho_sl_shock, rho_sl_rare),
        rho_star_right=np.where(rshock, rho_sr_shock, rho_sr_rare),
        left_shock=lshock,
        right_shock=rshock,
        left_head=np.where(lshock, sl, ul - cl),
        left_tail=np.where(lshock, sl, us - c_sl),
        right_head=np.where(rshock, sr, ur + cr),
        right_tail=np.where(rshock, sr, us + c_sr),
    )


def sample(fan: RiemannFan, left, right, gas: GasModel, xi):
    """Evaluate the self-similar solution at ``xi = x / t``."""
    g = gas.gamma
    rl, ul, pl = _split(left)
    rr, ur, pr = _split(right)
    cl = np.sqrt(g * pl / rl)
    cr = np.sqrt(g * pr / rr)
    xi = np.asarray(xi, dtype=np.float64)
    ps, us = fan.p_star, fan.u_star

    # inside the left rarefaction fan
    k = 2.0 / (g + 1.0)
    c_fan_l = k * (cl + 0.5 * (g - 1.0) * (ul - xi))
    u_fan_l = k * (cl + 0.5 * (g - 1.0) * ul + xi)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho_fan_l = rl * (c_fan_l / cl) ** (2.0 / (g - 1.0))
        p_fan_l = pl * (c_fan_l / cl) ** (2.0 * g / (g - 1.0))
    c_fan_r = k * (cr - 0.5 * (g - 1.0) * (ur - xi))
    u_fan_r = k * (-cr + 0.5 * (g - 1.0) * ur + xi)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho_fan_r = rr * (c_fan_r / cr) ** (2.0 / (g - 1.0))
        p_fan_r = pr * (c_fan_r / cr) ** (2.0 * g / (g - 1.0))

    left_side = xi <= us
    # left of the contact
    l_undisturbed = xi <= fan.left_head
    l_star = xi >= fan.left_tail
    rho_l = np.where(l_undisturbed, rl, np.where(l_star, fan.rho_star_left, rho_fan_l))
    u_l = np.where(l_undisturbed, ul, np.where(l_star, us, u_fan_l))
    p_l = np.where(l_undisturbed, pl, np.where(l_star, ps, p_fan_l))
    # right of the contact
    r_undisturbed = xi >= fan.right_head
    r_star = xi <= fan.right_tail
    rho_r = np.where(r_undisturbed, rr, np.where(r_star, fan.rho_star_right, rho_fan_r))
    u_r = np.where(r_undisturbed, ur, np.where(r_star, us, u_fan_r))
    p_r = np.where(r_undisturbed, pr, np.where(r_star, ps, p_fan_r))

    return np.stack([
        np.where(left_side, rho_l, rho_r),
        np.where(left_side, u_l, u_r),
        np.where(left_side, p_l, p_r),
    ])


def exact_riemann(left, right, gas: GasModel, xi=0.0) -> np.ndarray:
    """Exact solution ``(rho, u, p)`` of the Riemann problem at ``xi = x/t``.

    Identical left and right states return that state unchanged.
    """
    L = np.asarray(left, dtype=np.float64)
    R = np.asarray(right, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    trailing = np.broadcast_shapes(L.shape[1:], R.shape[1:], xi.shape)

    def widen(A):
        A = A.reshape(A.shape + (1,) * (len(trailing) + 1 - A.ndim))
        return np.broadcast_to(A, (3,) + trailing)

    L, R = widen(L), widen(R)
    xi = np.broadcast_to(xi, trailing)
    same = np.all(L == R, axis=0)
    out = np.array(L, copy=True)
    if np.all(same):
        return out
    k = ~same
    Lk, Rk = L[:, k], R[:, k]
    fan = riemann_fan(Lk, Rk, gas)
    out[:, k] = sample(fan, Lk, Rk, gas, xi[k])
    return out
