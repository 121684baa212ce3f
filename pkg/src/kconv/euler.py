"""Ideal-gas model, grids, state containers and per-cell thermodynamics.

Conserved states are arrays whose leading axis holds the four components
``(rho, m1, m2, E)``; primitive states hold ``(rho, u1, u2, p)``.  Every
function below accepts a single state of shape ``(4,)`` or a whole field of
shape ``(4, n, n)`` and works elementwise over the trailing axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ParameterError

RHO, M1, M2, EN = 0, 1, 2, 3

# Shift applied below the minimum initial entropy so that S >= 0 at t = 0.
S_FLOOR_MARGIN = 1e-12


@dataclass(frozen=True)
class GasModel:
    """Polytropic gas ``p = (gamma - 1) rho e``.

    ``s_floor`` is the reference entropy used to shift the total entropy,
    ``S = rho (s - s_floor)``; ``a_coeff = exp((gamma - 1) s_floor)`` is the
    matching prefactor of the energy written in ``(rho, m, S)`` variables.
    """

    gamma: float = 1.4
    s_floor: float = 0.0
    a_coeff: float = field(init=False)

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ParameterError(f"gamma must exceed 1, got {self.gamma}")
        object.__setattr__(self, "a_coeff", math.exp((self.gamma - 1.0) * self.s_floor))

    def with_floor(self, s_floor: float) -> "GasModel":
        return GasModel(self.gamma, float(s_floor))

    def with_floor_from(self, *states) -> "GasModel":
        """Return a copy whose floor sits just below the minimum specific
        entropy found in ``states`` (conserved arrays or fields)."""
        s_min = min(float(np.min(specific_entropy(_as_array(u), self))) for u in states)
        return self.with_floor(s_min - S_FLOOR_MARGIN)


@dataclass(frozen=True)
class Grid2D:
    """Uniform ``n x n`` mesh of the unit square.

    Arrays on the grid are indexed ``[i, j]`` with ``i`` along ``x1`` and
    ``j`` along ``x2``.  ``boundary`` is ``"periodic"`` (the default and the
    only choice used by the benchmarks) or ``"transmissive"`` (zero-gradient
    ghost cells, used for shock-tube validation)."""

    n: int
    boundary: str = "periodic"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"grid needs n >= 2 cells per direction, got {self.n}")
        if self.boundary not in ("periodic", "transmissive"):
            raise ParameterError(f"unknown boundary {self.boundary!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    dx = h
    dy = h

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def centers_1d(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.n

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates ``(x1, x2)``, each of shape ``(n, n)``."""
        c = self.centers_1d()
        return np.meshgrid(c, c, indexing="ij")

    def pad_mode(self) -> str:
        return "wrap" if self.boundary == "periodic" else "edge"


class PrimitiveState(NamedTuple):
    rho: object
    u1: object
    u2: object
    p: object


def _as_array(u):
    if isinstance(u, ConservedField):
        return u.U
    return np.asarray(u, dtype=np.float64)


def _first_bad(mask) -> tuple | None:
    if np.ndim(mask) == 0:
        return None
    idx = np.argwhere(mask)
    return tuple(int(k) for k in idx[0])


def _check_density(rho):
    bad = ~(rho > 0.0)
    if np.any(bad):
        raise DomainError("non-positive density", _first_bad(bad))


class ConservedField:
    """Cell averages ``(rho, m1, m2, E)`` on a :class:`Grid2D`.

    The data live in one ``(4, n, n)`` float64 array ``U``; ``rho``, ``mom``
    and ``en`` are views into it.
    """

    def __init__(self, grid: Grid2D, U, check: bool = True):
        U = np.array(U, dtype=np.float64)
        if U.shape != (4, grid.n, grid.n):
            raise ParameterError(f"expected state of shape {(4, grid.n, grid.n)}, got {U.shape}")
        self.grid = grid
        self.U = U
        if check:
            self.check_admissible()

    @classmethod
    def from_primitive(cls, grid: Grid2D, prim, gas: GasModel) -> "ConservedField":
        return cls(grid, primitive_to_conserved(prim, gas))

    @property
    def rho(self) -> np.ndarray:
        return self.U[RHO]

    @property
    def mom(self) -> np.ndarray:
        return self.U[M1:EN]

    @property
    def en(self) -> np.ndarray:
        return self.U[EN]

    @property
    def n(self) -> int:
        return self.grid.n

    def copy(self) -> "ConservedField":
        return ConservedField(self.grid, self.U.copy(), check=False)

    def check_admissible(self, gas: GasModel | None = None):
        """Raise :class:`DomainError` unless rho > 0 and the internal energy
        is positive in every cell."""
        _check_density(self.rho)
        eint = self.en - 0.5 * (self.U[M1] ** 2 + self.U[M2] ** 2) / self.rho
        bad = ~(eint > 0.0)
        if np.any(bad):
            raise DomainError("non-positive internal energy", _first_bad(bad))

    def totals(self) -> np.ndarray:
        """Domain integrals of the four conserved components."""
        return self.U.sum(axis=(1, 2)) * self.grid.cell_area

    def transpose(self) -> "ConservedField":
        """Mirror across the diagonal ``x1 = x2`` (swaps the momenta)."""
        V = np.stack([self.U[RHO].T, self.U[M2].T, self.U[M1].T, self.U[EN].T])
        return ConservedField(self.grid, V, check=False)

    def __repr__(self):
        return f"ConservedField(n={self.n}, boundary={self.grid.boundary!r})"


def kinetic_energy(U) -> np.ndarray:
    U = _as_array(U)
    return 0.5 * (U[M1] * U[M1] + U[M2] * U[M2]) / U[RHO]


def pressure(U, gas: GasModel, require_positive: bool = False):
    """``p = (gamma - 1) (E - |m|^2 / (2 rho))``."""
    U = _as_array(U)
    _check_density(U[RHO])
    p = (gas.gamma - 1.0) * (U[EN] - kinetic_energy(U))
    if require_positive:
        bad = ~(p > 0.0)
        if np.any(bad):
            raise DomainError("non-positive pressure", _first_bad(bad))
    return p


def temperature(U, gas: GasModel, require_positive: bool = False):
    """``theta = p / rho`` so that ``e = theta / (gamma - 1)``."""
    U = _as_array(U)
    return pressure(U, gas, require_positive) / U[RHO]


def specific_entropy(U, gas: GasModel):
    """``s = log(theta) / (gamma - 1) - log(rho)``."""
    U = _as_array(U)
    theta = temperature(U, gas, require_positive=True)
    return np.log(theta) / (gas.gamma - 1.0) - np.log(U[RHO])


def total_entropy(U, gas: GasModel):
    """Shifted total entropy ``S = rho (s - s_floor)``.

    The unshifted ``rho s`` is ``U[0] * specific_entropy(U, gas)``.
    """
    U = _as_array(U)
    return U[RHO] * (specific_entropy(U, gas) - gas.s_floor)


def total_energy_of(rho, mom, S, gas: GasModel):
    """Total energy as a function of ``(rho, m, S)``.

    ``E = |m|^2 / (2 rho) + a / (gamma - 1) rho^gamma exp((gamma - 1) S / rho)``
    with ``a = gas.a_coeff``.
    """
    rho = np.asarray(rho, dtype=np.float64)
    mom = np.asarray(mom, dtype=np.float64)
    _check_density(rho)
    g = gas.gamma
    kin = 0.5 * (mom[0] * mom[0] + mom[1] * mom[1]) / rho
    return kin + gas.a_coeff / (g - 1.0) * rho**g * np.exp((g - 1.0) * S / rho)


def primitive_to_conserved(prim, gas: GasModel) -> np.ndarray:
    W = np.asarray(prim, dtype=np.float64)
    rho, u1, u2, p = W
    _check_density(rho)
    bad = ~(p > 0.0)
    if np.any(bad):
        raise DomainError("non-positive pressure", _first_bad(bad))
    return np.stack([
        rho,
        rho * u1,
        rho * u2,
        p / (gas.gamma - 1.0) + 0.5 * rho * (u1 * u1 + u2 * u2),
    ])


def conserved_to_primitive(U, gas: GasModel) -> np.ndarray:
    U = _as_array(U)
    p = pressure(U, gas, require_positive=True)
    return np.stack([U[RHO], U[M1] / U[RHO], U[M2] / U[RHO], p])


def sound_speed(U, gas: GasModel):
    U = _as_array(U)
    return np.sqrt(gas.gamma * pressure(U, gas) / U[RHO])


def physical_flux(W, gas: GasModel, axis: int) -> np.ndarray:
    """Euler flux of primitive state ``W`` along ``x1`` (axis 0) or ``x2``
    (axis 1), returned in conserved ordering."""
    rho, u1, u2, p = W
    un = u1 if axis == 0 else u2
    E = p / (gas.gamma - 1.0) + 0.5 * rho * (u1 * u1 + u2 * u2)
    f_m1 = rho * u1 * un
    f_m2 = rho * u2 * un
    if axis == 0:
        f_m1 = f_m1 + p
    else:
        f_m2 = f_m2 + p
    return np.stack([rho * un, f_m1, f_m2, (E + p) * un])
