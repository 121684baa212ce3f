"""K-convergence post-processing over a mesh hierarchy.

For a stack of solutions ``U_1, ..., U_K`` (coarse to fine) prolonged to the
finest grid:

* Cesàro average   ``A_k = (1/k) sum_{j<=k} U_j``
* first variance   ``V_k = (1/k) sum_{j<=k} |U_j - A_k|``

and the errors of row ``k`` against the full stack ``K`` are

* ``E1 = ||U_k - U_K||``, ``E2 = ||A_k - A_K||``, ``E3 = ||V_k - V_K||``
* ``E4 = || W_q(empirical measure of levels <= k, same for <= K) ||``

all in ``L^1`` of the unit square at the final time.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import euler
from .errors import DomainError, ParameterError
from .euler import GasModel
from .stack import SolutionStack, prolong  # noqa: F401  (re-exported)
from .wasserstein import e4_field

TABLE_COLUMNS = ("n", "E1", "order1", "E2", "order2", "E3", "order3", "E4", "order4")


def _check_upto(stack: SolutionStack, upto):
    if len(stack) == 0:
        raise ParameterError("empty stack")
    upto = len(stack) if upto is None else int(upto)
    if not 1 <= upto <= len(stack):
        raise ParameterError(f"upto={upto} outside 1..{len(stack)}")
    return upto


def cesaro_average(stack: SolutionStack, upto=None, variable="rho") -> np.ndarray:
    upto = _check_upto(stack, upto)
    return stack.fields(variable, upto).mean(axis=0)


def first_variance(stack: SolutionStack, upto=None, variable="rho") -> np.ndarray:
    upto = _check_upto(stack, upto)
    F = stack.fields(variable, upto)
    return np.abs(F - F.mean(axis=0)).mean(axis=0)


def l1_norm(values: np.ndarray) -> float:
    """``L^1`` norm of a cell field on the unit square (cell area ``1/N^2``)."""
    return float(np.sum(np.abs(values)) / values.size)


def observed_orders(errors, ns):
    """``log(e_k / e_{k+1}) / log(n_{k+1} / n_k)``; ``nan`` where undefined."""
    out = [math.nan]
    for (e0, e1), (n0, n1) in zip(zip(errors, errors[1:]), zip(ns, ns[1:])):
        if e0 > 0.0 and e1 > 0.0:
            out.append(math.log(e0 / e1) / math.log(n1 / n0))
        else:
            out.append(math.nan)
    return out


@dataclass
class ConvergenceTable:
    """Rows of ``(n, E1, E2, E3[, E4])`` against the finest level."""

    variable: str
    reference: int
    ns: list
    errors: dict = field(default_factory=dict)
    failed: list = field(default_factory=list)

    def orders(self, key):
        return observed_orders(self.errors[key], self.ns)

    def column(self, key):
        return np.array(self.errors[key])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(TABLE_COLUMNS) + "\n")
        keys = ("E1", "E2", "E3", "E4")
        orders = {k: self.orders(k) for k in keys if k in self.errors}
        rows = [(n, None) for n in self.ns] + [(n, "failed") for n in self.failed]
        rows.sort(key=lambda r: r[0])
        for n, status in rows:
            cells = [str(n)]
            if status == "failed":
                cells += ["failed"] + [""] * (len(TABLE_COLUMNS) - 2)
            else:
                k = self.ns.index(n)
                for key in keys:
                    if key in self.errors:
                        cells.append(_fmt_err(self.errors[key][k]))
                        cells.append(_fmt_order(orders[key][k]))
                    else:
                        cells += ["", ""]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def _fmt_err(e):
    return f"{e:.6e}"


def _fmt_order(o):
    return "-" if not math.isfinite(o) else f"{o:.4f}"


def error_metrics(stack: SolutionStack, reference_level=None, variable="rho") -> ConvergenceTable:
    """E1, E2, E3 of every non-reference level against the finest one."""
    if len(stack) == 0:
        raise ParameterError("empty stack")
    K = len(stack)
    if reference_level is not None and reference_level not in (stack.finest, K - 1, -1):
        raise ParameterError(f"reference level {reference_level} is not the finest level {stack.finest}")
    F = stack.fields(variable)
    ref_single = F[-1]
    ref_avg = F.mean(axis=0)
    ref_var = np.abs(F - ref_avg).mean(axis=0)
    e1, e2, e3 = [], [], []
    for k in range(1, K):
        avg = F[:k].mean(axis=0)
        var = np.abs(F[:k] - avg).mean(axis=0)
        e1.append(l1_norm(F[k - 1] - ref_single))
        e2.append(l1_norm(avg - ref_avg))
        e3.append(l1_norm(var - ref_var))
    if K == 1:
        # a lone reference level compares with itself
        return ConvergenceTable(variable, stack.finest, [stack.finest],
                                {"E1": [0.0], "E2": [0.0], "E3": [0.0]})
    return ConvergenceTable(variable, stack.finest, stack.ns[:-1],
                            {"E1": e1, "E2": e2, "E3": e3})


def convergence_table(stack: SolutionStack, variable="rho", q=1.0, components="tuple",
                      scaling=None, with_e4=True) -> ConvergenceTable:
    """:func:`error_metrics` plus the E4 column."""
    table = error_metrics(stack, None, variable)
    if with_e4:
        K = len(stack)
        if K == 1:
            table.errors["E4"] = [0.0]
        else:
            table.errors["E4"] = [e4_field(stack.prefix(k), stack, q, components, scaling)
                                  for k in range(1, K)]
    return table


def space_time_error_metrics(stacks_by_time: dict, variable="rho") -> ConvergenceTable:
    """E1-E3 in ``L^1`` of space-time, trapezoidal in time over the stored
    snapshot times (keys of ``stacks_by_time``)."""
    times = sorted(stacks_by_time)
    if len(times) < 2:
        raise ParameterError("space-time norms need at least two snapshot times")
    tables = [error_metrics(stacks_by_time[t], None, variable) for t in times]
    ns = tables[0].ns
    out = {}
    for key in ("E1", "E2", "E3"):
        vals = np.array([tb.errors[key] for tb in tables])
        out[key] = list(np.trapezoid(vals, times, axis=0))
    return ConvergenceTable(variable, tables[0].reference, ns, out)


def jensen_energy_defect(stack: SolutionStack, upto=None, gas: GasModel | None = None) -> np.ndarray:
    """``mean_j E(rho_j, m_j, S_j) - E(mean rho, mean m, mean S)`` per cell.

    Non-negative by convexity of the energy in ``(rho, m, S)``.
    """
    upto = _check_upto(stack, upto)
    gas = stack.gas if gas is None else gas
    rho = stack.fields("rho", upto)
    m1 = stack.fields("m1", upto)
    m2 = stack.fields("m2", upto)
    S = np.stack([prolong(euler.total_entropy(f.U, gas), stack.finest)
                  for _, f in stack.levels[:upto]])
    rho_bar = rho.mean(axis=0)
    if np.any(~(rho_bar > 0.0)):
        raise DomainError("Cesàro-averaged density is not positive")
    mean_energy = euler.total_energy_of(rho, np.stack([m1, m2]), S, gas).mean(axis=0)
    energy_of_mean = euler.total_energy_of(rho_bar, np.stack([m1.mean(axis=0), m2.mean(axis=0)]),
                                           S.mean(axis=0), gas)
    return mean_energy - energy_of_mean
