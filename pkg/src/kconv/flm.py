"""First-order FLM finite volume scheme and its plain-upwind special case.

The scheme upwinds every conserved quantity with the sign of the averaged
normal velocity, adds a jump diffusion ``mu_h [[r]]`` with ``mu_h = h**beta``
and damps velocity jumps with ``h**(alpha - 1) [[u]]`` in the momentum and
energy balances.  Time stepping is explicit forward Euler.

Face conventions: a face between cells ``K`` (``in``) and ``L`` (``out``)
carries the unit normal pointing from ``in`` to ``out``; jumps are
``[[f]] = f_out - f_in`` and averages ``<f> = (f_in + f_out) / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import euler
from .errors import DomainError, ParameterError, StepRejected
from .euler import EN, M1, M2, RHO, ConservedField, GasModel


class FaceTrace(NamedTuple):
    """One-sided values of a piecewise constant function on a face."""

    inner: object
    outer: object
    normal: object = (1.0, 0.0)

    @property
    def jump(self):
        return np.subtract(self.outer, self.inner)

    @property
    def average(self):
        return 0.5 * (np.asarray(self.inner) + np.asarray(self.outer))


@dataclass(frozen=True)
class FlmParams:
    alpha: float = 1.8
    beta: float = 0.8
    mu_scale: float = 1.0
    cfl: float = 0.15
    variant: str = "flm"

    def __post_init__(self):
        if self.variant not in ("flm", "plain_upwind"):
            raise ParameterError(f"unknown FLM variant {self.variant!r}")
        if not 0.0 < self.alpha < 2.0:
            raise ParameterError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not 0.0 <= self.beta < 1.0:
            raise ParameterError(f"beta must lie in [0, 1), got {self.beta}")
        if self.mu_scale < 0.0:
            raise ParameterError("mu_scale must be non-negative")
        if not self.cfl > 0.0:
            raise ParameterError("cfl must be positive")

    def mu(self, h: float) -> float:
        if self.variant == "plain_upwind":
            return 0.0
        return self.mu_scale * h**self.beta

    def velocity_penalty(self, h: float) -> float:
        if self.variant == "plain_upwind":
            return 0.0
        return h ** (self.alpha - 1.0)


def upwind_part(r_trace: FaceTrace, u_trace: FaceTrace):
    """``r_in [<u>.n]^+ + r_out [<u>.n]^-``."""
    un = _normal_component(u_trace)
    return r_trace.inner * np.maximum(un, 0.0) + r_trace.outer * np.minimum(un, 0.0)


def upwind_part_central(r_trace: FaceTrace, u_trace: FaceTrace):
    """The same flux in central-plus-dissipation form,
    ``<r> <u>.n - |<u>.n| [[r]] / 2``."""
    un = _normal_component(u_trace)
    return r_trace.average * un - 0.5 * np.abs(un) * r_trace.jump


def numerical_flux(r_trace: FaceTrace, u_trace: FaceTrace, mu_h: float):
    if mu_h < 0.0:
        raise ParameterError(f"mu_h must be non-negative, got {mu_h}")
    return upwind_part(r_trace, u_trace) - mu_h * r_trace.jump


def _normal_component(u_trace: FaceTrace):
    # velocity traces are vectors (leading axis = components); a 0-d value
    # is taken to be the normal component itself
    ubar = u_trace.average
    if ubar.ndim == 0:
        return ubar
    nrm = np.asarray(u_trace.normal, dtype=np.float64)
    return np.tensordot(nrm, ubar, axes=(0, 0))


def face_pairs(A: np.ndarray, axis: int, mode: str):
    """Inner and outer traces on the ``n + 1`` faces normal to ``axis``.

    ``A`` has shape ``(k, n, n)``; face ``f`` separates cells ``f - 1`` and
    ``f``.  With periodic data faces ``0`` and ``n`` see identical traces, so
    flux differences telescope exactly.
    """
    pad = [(0, 0), (0, 0), (0, 0)]
    pad[axis + 1] = (1, 1)
    P = np.pad(A, pad, mode=mode)
    n = A.shape[axis + 1]
    sl_in = [slice(None)] * 3
    sl_out = [slice(None)] * 3
    sl_in[axis + 1] = slice(0, n + 1)
    sl_out[axis + 1] = slice(1, n + 2)
    return P[tuple(sl_in)], P[tuple(sl_out)]


def flux_divergence(F: np.ndarray, axis: int) -> np.ndarray:
    """``F[f + 1] - F[f]`` along the face axis of a ``(k, ...)`` face array."""
    n = F.shape[axis + 1] - 1
    hi = [slice(None)] * F.ndim
    lo = [slice(None)] * F.ndim
    hi[axis + 1] = slice(1, n + 1)
    lo[axis + 1] = slice(0, n)
    return F[tuple(hi)] - F[tuple(lo)]


def flm_face_fluxes(U: np.ndarray, p: np.ndarray, axis: int, mu_h: float,
                    pen: float, mode: str) -> np.ndarray:
    """Face fluxes of all four balances on faces normal to ``axis``.

    Testing the weak form with the indicator of a single cell turns the
    energy pressure terms ``<p>[[Phi u]].n - <p Phi>[[u]].n`` into the
    conservative face flux ``(p_in u_out.n + p_out u_in.n) / 2``; the
    remaining terms are already in flux form.
    """
    kn, kt = (M1, M2) if axis == 0 else (M2, M1)
    A = np.concatenate([U, p[None]], axis=0)
    Ai, Ao = face_pairs(A, axis, mode)
    rho_i, rho_o = Ai[RHO], Ao[RHO]
    un_i, un_o = Ai[kn] / rho_i, Ao[kn] / rho_o
    ut_i, ut_o = Ai[kt] / rho_i, Ao[kt] / rho_o
    p_i, p_o = Ai[4], Ao[4]

    ubar = 0.5 * (un_i + un_o)
    w_plus = np.maximum(ubar, 0.0)
    w_minus = np.minimum(ubar, 0.0)

    def flux(k):
        return Ai[k] * w_plus + Ao[k] * w_minus - mu_h * (Ao[k] - Ai[k])

    F = np.empty((4,) + ubar.shape)
    F[RHO] = flux(RHO)
    F[kn] = flux(kn) + 0.5 * (p_i + p_o) - pen * (un_o - un_i)
    F[kt] = flux(kt) - pen * (ut_o - ut_i)
    # [[u]].<u> = (|u_out|^2 - |u_in|^2) / 2
    ke_jump = 0.5 * ((un_o * un_o + ut_o * ut_o) - (un_i * un_i + ut_i * ut_i))
    F[EN] = flux(EN) + 0.5 * (p_i * un_o + p_o * un_i) - pen * ke_jump
    return F


def flm_rhs(state: ConservedField, params: FlmParams, gas: GasModel) -> np.ndarray:
    """Sum of face-flux differences, ``h * dU/dt`` with the sign flipped."""
    grid = state.grid
    h = grid.h
    mode = grid.pad_mode()
    p = euler.pressure(state.U, gas)
    mu_h = params.mu(h)
    pen = params.velocity_penalty(h)
    Fx = flm_face_fluxes(state.U, p, 0, mu_h, pen, mode)
    Fy = flm_face_fluxes(state.U, p, 1, mu_h, pen, mode)
    return flux_divergence(Fx, 0) + flux_divergence(Fy, 1)


def flm_step(state: ConservedField, params: FlmParams, gas: GasModel, dt: float) -> ConservedField:
    """One explicit step of the FLM (or plain upwind) scheme."""
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    div = flm_rhs(state, params, gas)
    U = state.U - (dt / state.grid.h) * div
    return admissible_or_reject(state.grid, U, dt)


def admissible_or_reject(grid, U, dt) -> ConservedField:
    out = ConservedField(grid, U, check=False)
    try:
        out.check_admissible()
    except DomainError as exc:
        raise StepRejected("step lost positivity", exc.cell, dt) from None
    return out


def stable_dt(state: ConservedField, params_or_cfl, gas: GasModel) -> float:
    """``cfl * h / max(|u1| + |u2| + 2c)``."""
    cfl = params_or_cfl if isinstance(params_or_cfl, (int, float)) else params_or_cfl.cfl
    U = state.U
    c = euler.sound_speed(U, gas)
    speed = np.abs(U[M1] / U[RHO]) + np.abs(U[M2] / U[RHO]) + 2.0 * c
    return cfl * state.grid.h / float(np.max(speed))


def entropy_diagnostic(before: ConservedField, after: ConservedField, dt: float,
                       gas: GasModel, chi_cap: float = math.inf) -> float:
    """Rate of change of ``int rho chi(s)`` with ``chi(s) = min(s, chi_cap)``.

    Entropy stable schemes keep this non-negative.
    """
    if before is after or np.array_equal(before.U, after.U):
        return 0.0
    area = before.grid.cell_area
    s0 = np.minimum(euler.specific_entropy(before.U, gas), chi_cap)
    s1 = np.minimum(euler.specific_entropy(after.U, gas), chi_cap)
    return float(np.sum(after.rho * s1 - before.rho * s0) * area / dt)


def entropy_scale(state: ConservedField, gas: GasModel) -> float:
    """Magnitude of the domain entropy, used to scale residual tolerances."""
    s = euler.specific_entropy(state.U, gas)
    return max(float(np.sum(state.rho * np.abs(s)) * state.grid.cell_area), 1.0)


def run_flm(initial: ConservedField, params: FlmParams, gas: GasModel, t_end: float,
            observers=(), snapshot_times=(), **kwargs):
    """Advance ``initial`` to ``t_end``; returns ``(final, trace)``.

    See :func:`kconv.timeloop.integrate` for observers and the trace.
    """
    from .timeloop import integrate

    return integrate(
        initial,
        lambda s, dt: flm_step(s, params, gas, dt),
        lambda s: stable_dt(s, params, gas),
        gas,
        t_end,
        observers=observers,
        snapshot_times=snapshot_times,
        **kwargs,
    )
