"""Second-order GRP finite volume scheme.

Each cell carries a minmod-limited linear reconstruction.  At every face the
exact Riemann solution of the reconstructed traces gives the face state at
``t_k``; its time derivative is approximated acoustically, i.e. from the
linearized Euler equations about that state, with each characteristic field
fed by the slope of the cell it comes from.  The face state advanced by half
a step enters the physical flux, and all faces update the cells at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import euler
from .errors import ParameterError
from .euler import EN, M1, M2, RHO, ConservedField, GasModel
from .flm import admissible_or_reject, flux_divergence, stable_dt
from .riemann import exact_riemann

DEFAULT_CFL = 0.45


def minmod(a, b):
    """``sign(a) min(|a|, |b|)`` if ``a`` and ``b`` share a sign, else 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m = np.where(np.abs(a) <= np.abs(b), a, b)
    return np.where(a * b > 0.0, m, 0.0)


GHOST = 2


@dataclass
class LinearReconstruction:
    """Cell values and limited undivided differences (slope times ``h``).

    Arrays cover the grid plus ``GHOST`` layers of ghost cells on every side
    (periodic wrap or zero-gradient copies), so ``center[:, GHOST:-GHOST,
    GHOST:-GHOST]`` is the physical grid.  With ``variables="primitive"``
    the limited quantities are ``(rho, u1, u2, p)`` instead of the
    conserved ones.
    """

    center: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    variables: str = "conserved"

    @classmethod
    def build(cls, state: ConservedField, gas: GasModel, variables="conserved",
              zero_slopes=False):
        if variables not in ("conserved", "primitive"):
            raise ParameterError(f"unknown limiting variables {variables!r}")
        V = state.U if variables == "conserved" else euler.conserved_to_primitive(state.U, gas)
        g = GHOST
        P = np.pad(V, ((0, 0), (g, g), (g, g)), mode=state.grid.pad_mode())
        dx = np.zeros_like(P)
        dy = np.zeros_like(P)
        if not zero_slopes:
            dx[:, 1:-1, :] = minmod(P[:, 1:-1, :] - P[:, :-2, :], P[:, 2:, :] - P[:, 1:-1, :])
            dy[:, :, 1:-1] = minmod(P[:, :, 1:-1] - P[:, :, :-2], P[:, :, 2:] - P[:, :, 1:-1])
        rec = cls(P, dx, dy, variables)
        rec._drop_bad_slopes(gas)
        return rec

    def slopes(self, axis):
        return self.dx if axis == 0 else self.dy

    def traces(self, axis, gas):
        """Primitive states at the low and high face of every cell."""
        d = self.slopes(axis)
        lo, hi = self.center - 0.5 * d, self.center + 0.5 * d
        if self.variables == "conserved":
            return _to_primitive_unchecked(lo, gas), _to_primitive_unchecked(hi, gas)
        return lo, hi

    def primitive_slopes(self, axis, W, gas):
        """Undivided primitive differences at primitive state ``W``."""
        d = self.slopes(axis)
        if self.variables == "primitive":
            return d
        return conserved_to_primitive_differential(W, d, gas)

    def _drop_bad_slopes(self, gas):
        # zero every slope of a cell whose face traces are not admissible
        bad = np.zeros(self.center.shape[1:], dtype=bool)
        for axis in (0, 1):
            for W in self.traces(axis, gas):
                bad |= ~((W[0] > 0.0) & (W[3] > 0.0))
        if np.any(bad):
            self.dx = np.where(bad, 0.0, self.dx)
            self.dy = np.where(bad, 0.0, self.dy)

    def face_data(self, axis, gas):
        """``(W, dW_n, dW_t)`` of the cells left and right of the ``n + 1``
        physical faces normal to ``axis``."""
        g = GHOST
        lo, hi = self.traces(axis, gas)
        m = self.center.shape[1] - 2 * g
        if axis == 0:
            left = (slice(None), slice(g - 1, g + m), slice(g, g + m))
            right = (slice(None), slice(g, g + m + 1), slice(g, g + m))
        else:
            left = (slice(None), slice(g, g + m), slice(g - 1, g + m))
            right = (slice(None), slice(g, g + m), slice(g, g + m + 1))
        WL, WR = hi[left], lo[right]
        dL = self.primitive_slopes(axis, hi, gas)[left]
        dR = self.primitive_slopes(axis, lo, gas)[right]
        tL = self.primitive_slopes(1 - axis, hi, gas)[left]
        tR = self.primitive_slopes(1 - axis, lo, gas)[right]
        return (WL, dL, tL), (WR, dR, tR)


def _to_primitive_unchecked(U, gas):
    rho = U[RHO]
    with np.errstate(invalid="ignore", divide="ignore"):
        u1 = U[M1] / rho
        u2 = U[M2] / rho
    p = (gas.gamma - 1.0) * (U[EN] - 0.5 * rho * (u1 * u1 + u2 * u2))
    return np.stack([rho, u1, u2, p])


def conserved_to_primitive_differential(W, dU, gas):
    """Map conserved increments ``dU`` to primitive increments at ``W``."""
    rho, u1, u2, _ = W
    drho, dm1, dm2, dE = dU
    du1 = (dm1 - u1 * drho) / rho
    du2 = (dm2 - u2 * drho) / rho
    dp = (gas.gamma - 1.0) * (dE - u1 * dm1 - u2 * dm2 + 0.5 * (u1 * u1 + u2 * u2) * drho)
    return np.stack([drho, du1, du2, dp])


def _normal_frame(W, axis):
    """Reorder primitive ``(rho, u1, u2, p)`` into ``(rho, u_n, u_t, p)``."""
    if axis == 0:
        return W
    return W[[0, 2, 1, 3]]


def acoustic_time_derivative(Ws, dW_left, dW_right, dWt_left, dWt_right, gas):
    """Time derivative of the face state in the normal frame.

    ``Ws`` is the Riemann state at the face in normal-frame primitives
    ``(rho, u_n, u_t, p)``; ``dW_*`` are normal-direction primitive slopes
    and ``dWt_*`` transverse slopes of the cells left and right of the face
    (all per unit length).  Normal characteristic fields take the slope of
    the side they travel from; the transverse term is upwinded with the
    contact velocity.
    """
    g = gas.gamma
    rho, un, ut, p = Ws
    c = np.sqrt(g * p / rho)
    c2 = c * c
    lam = (un - c, un, un + c)

    def pick(k):
        return [np.where(lam[k] > 0.0, dW_left[i], dW_right[i]) for i in range(4)]

    d1, d2, d3 = pick(0), pick(1), pick(2)
    a1 = (d1[3] - rho * c * d1[1]) / (2.0 * c2)
    a2 = d2[0] - d2[3] / c2
    a4 = d2[2]
    a3 = (d3[3] + rho * c * d3[1]) / (2.0 * c2)

    l1, l2, l3 = lam
    w_rho = -(l1 * a1 + l2 * a2 + l3 * a3)
    w_un = -(c / rho) * (l3 * a3 - l1 * a1)
    w_ut = -l2 * a4
    w_p = -c2 * (l1 * a1 + l3 * a3)

    # transverse fluxes, upwinded by the contact
    up = un > 0.0
    dt_ = [np.where(up, dWt_left[i], dWt_right[i]) for i in range(4)]
    dt_ = [np.where(un == 0.0, 0.5 * (dWt_left[i] + dWt_right[i]), dt_[i]) for i in range(4)]
    t_rho, t_un, t_ut, t_p = dt_
    w_rho = w_rho - (ut * t_rho + rho * t_ut)
    w_un = w_un - ut * t_un
    w_ut = w_ut - (ut * t_ut + t_p / rho)
    w_p = w_p - (ut * t_p + g * p * t_ut)
    return np.stack([w_rho, w_un, w_ut, w_p])


def grp_face_flux(recon_left, recon_right, dt, gas: GasModel, h: float, axis: int = 0):
    """Flux through faces from the traces of the cells on either side.

    ``recon_left``/``recon_right`` are tuples ``(W, dW_n, dW_t)`` of
    physical-frame primitive traces and primitive normal/transverse
    undivided differences.  Returns the conserved-ordering flux of the face
    state at the half step.
    """
    WL, dL, dtL = recon_left
    WR, dR, dtR = recon_right
    nl, nr = _normal_frame(WL, axis), _normal_frame(WR, axis)
    star = exact_riemann(nl[[0, 1, 3]], nr[[0, 1, 3]], gas, 0.0)
    us = star[1]
    ut = np.where(us > 0.0, nl[2], np.where(us < 0.0, nr[2], 0.5 * (nl[2] + nr[2])))
    Ws = np.stack([star[0], us, ut, star[2]])

    Wt = acoustic_time_derivative(
        Ws,
        _normal_frame(dL, axis) / h, _normal_frame(dR, axis) / h,
        _normal_frame(dtL, axis) / h, _normal_frame(dtR, axis) / h,
        gas,
    )
    Wh = Ws + (0.5 * dt) * Wt
    ok = (Wh[0] > 0.0) & (Wh[3] > 0.0)
    Wh = np.where(ok, Wh, Ws)
    return euler.physical_flux(_normal_frame(Wh, axis), gas, axis)


def grp_fluxes(state: ConservedField, gas: GasModel, dt: float, variables="conserved",
               zero_slopes=False):
    rec = LinearReconstruction.build(state, gas, variables, zero_slopes)
    h = state.grid.h
    out = []
    for axis in (0, 1):
        left, right = rec.face_data(axis, gas)
        out.append(grp_face_flux(left, right, dt, gas, h, axis))
    return out


def grp_step(state: ConservedField, gas: GasModel, dt: float, variables="conserved",
             zero_slopes=False) -> ConservedField:
    """One unsplit GRP step; x- and y-fluxes are both taken at ``t + dt/2``."""
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    Fx, Fy = grp_fluxes(state, gas, dt, variables, zero_slopes)
    div = flux_divergence(Fx, 0) + flux_divergence(Fy, 1)
    U = state.U - (dt / state.grid.h) * div
    return admissible_or_reject(state.grid, U, dt)


def godunov_step(state: ConservedField, gas: GasModel, dt: float) -> ConservedField:
    """First-order Godunov step with exact Riemann fluxes of cell values."""
    return grp_step(state, gas, dt, zero_slopes=True)


def run_grp(initial: ConservedField, gas: GasModel, t_end: float, cfl: float = DEFAULT_CFL,
            observers=(), snapshot_times=(), variables="conserved", **kwargs):
    from .timeloop import integrate

    return integrate(
        initial,
        lambda s, dt: grp_step(s, gas, dt, variables),
        lambda s: stable_dt(s, cfl, gas),
        gas,
        t_end,
        observers=observers,
        snapshot_times=snapshot_times,
        **kwargs,
    )
