"""Explicit time integration driver shared by the FLM and GRP schemes."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import euler
from .errors import ParameterError, StepRejected
from .flm import entropy_diagnostic

log = logging.getLogger(__name__)

DIAGNOSTIC_COLUMNS = (
    "step", "time", "dt", "total_mass", "total_energy",
    "min_rho", "min_p", "min_s", "entropy_residual",
)

MAX_RETRIES = 8


@dataclass
class Trace:
    """Per-step diagnostics; ``rows`` follow :data:`DIAGNOSTIC_COLUMNS`."""

    rows: list = field(default_factory=list)
    rejections: int = 0

    def column(self, name: str) -> np.ndarray:
        k = DIAGNOSTIC_COLUMNS.index(name)
        return np.array([r[k] for r in self.rows])

    def __len__(self):
        return len(self.rows)


def diagnostics_row(step, t, dt, state, gas, residual):
    U = state.U
    area = state.grid.cell_area
    p = euler.pressure(U, gas)
    s = euler.specific_entropy(U, gas)
    return (
        step, t, dt,
        float(np.sum(U[0]) * area),
        float(np.sum(U[3]) * area),
        float(np.min(U[0])),
        float(np.min(p)),
        float(np.min(s)),
        residual,
    )


def integrate(initial, step, dt_rule, gas, t_end, observers=(), snapshot_times=(),
              diagnostics=True, chi_cap=math.inf, max_retries=MAX_RETRIES):
    """Advance ``initial`` with ``step(state, dt)`` until ``t_end``.

    ``dt_rule(state)`` proposes the step; steps are clipped to land exactly
    on every entry of ``snapshot_times`` and on ``t_end``.  On
    :class:`StepRejected` the step is halved, at most ``max_retries`` times.
    Each observer is called as ``observer(t, state)`` at every snapshot time
    and at ``t_end``.  Returns ``(final_state, Trace)``.
    """
    if not t_end > 0.0:
        raise ParameterError(f"t_end must be positive, got {t_end}")
    targets = sorted({float(t) for t in snapshot_times if 0.0 < t < t_end} | {float(t_end)})
    trace = Trace()
    state = initial
    t = 0.0
    k = 0
    if diagnostics:
        trace.rows.append(diagnostics_row(0, 0.0, 0.0, state, gas, 0.0))
    for target in targets:
        while t < target:
            dt = dt_rule(state)
            clipped = t + dt >= target
            if clipped:
                dt = target - t
            for attempt in range(max_retries + 1):
                try:
                    new = step(state, dt)
                    break
                except StepRejected as exc:
                    if attempt == max_retries:
                        raise StepRejected(
                            f"step {k + 1} at t={t:.6g} rejected after {max_retries} halvings",
                            exc.cell, dt) from exc
                    trace.rejections += 1
                    clipped = False
                    dt *= 0.5
                    log.debug("step %d rejected, retrying with dt=%g", k + 1, dt)
            k += 1
            res = entropy_diagnostic(state, new, dt, gas, chi_cap) if diagnostics else 0.0
            t = target if clipped else t + dt
            state = new
            if diagnostics:
                trace.rows.append(diagnostics_row(k, t, dt, state, gas, res))
        for obs in observers:
            obs(t, state)
    return state, trace
