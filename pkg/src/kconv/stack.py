"""Mesh hierarchies of final-time solutions and cross-mesh prolongation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import euler
from .errors import ParameterError
from .euler import ConservedField, GasModel

VARIABLES = ("rho", "m1", "m2", "S", "E")


def prolong(values: np.ndarray, target_n: int) -> np.ndarray:
    """Piecewise-constant injection of an ``(..., n, n)`` field onto the
    ``target_n`` grid; each fine cell takes its parent cell's value."""
    values = np.asarray(values)
    n = values.shape[-1]
    if target_n % n:
        raise ParameterError(f"target grid {target_n} is not a refinement of {n}")
    r = target_n // n
    if r == 1:
        return values
    return np.repeat(np.repeat(values, r, axis=-2), r, axis=-1)


def variable_field(state: ConservedField, name: str, gas: GasModel) -> np.ndarray:
    """Cell values of ``rho``, ``m1``, ``m2``, ``S`` (shifted total entropy)
    or ``E``."""
    U = state.U
    if name == "rho":
        return U[0]
    if name == "m1":
        return U[1]
    if name == "m2":
        return U[2]
    if name == "E":
        return U[3]
    if name == "S":
        return euler.total_entropy(U, gas)
    raise ParameterError(f"unknown variable {name!r}; choose from {VARIABLES}")


@dataclass
class SolutionStack:
    """Final-time solutions of one experiment on nested meshes, coarse first."""

    levels: list
    gas: GasModel
    time: float

    def __post_init__(self):
        if not self.levels:
            raise ParameterError("a solution stack needs at least one level")
        self.levels = sorted(((int(n), f) for n, f in self.levels), key=lambda lv: lv[0])
        ns = self.ns
        for a, b in zip(ns, ns[1:]):
            if b <= a or b % a:
                raise ParameterError(f"levels {ns} are not nested refinements")
        for n, f in self.levels:
            if f.n != n:
                raise ParameterError(f"level labelled {n} holds a {f.n}-grid")

    @property
    def ns(self) -> list:
        return [n for n, _ in self.levels]

    @property
    def finest(self) -> int:
        return self.ns[-1]

    def __len__(self):
        return len(self.levels)

    def prefix(self, k: int) -> "SolutionStack":
        """The ``k`` coarsest levels."""
        if not 1 <= k <= len(self):
            raise ParameterError(f"prefix length {k} outside 1..{len(self)}")
        return SolutionStack(self.levels[:k], self.gas, self.time)

    def fields(self, variable: str, upto: int | None = None, target_n: int | None = None):
        """Prolonged values of ``variable`` for the first ``upto`` levels,
        stacked into an array of shape ``(upto, N, N)``."""
        upto = len(self) if upto is None else upto
        if not 1 <= upto <= len(self):
            raise ParameterError(f"upto={upto} outside 1..{len(self)}")
        N = self.finest if target_n is None else target_n
        return np.stack([prolong(variable_field(f, variable, self.gas), N)
                         for _, f in self.levels[:upto]])
