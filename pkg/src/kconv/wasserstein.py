"""Exact Wasserstein distances between small discrete measures.

``wq_distance`` solves the transportation problem with a network simplex on
the bipartite source/target graph.  ``e4_field`` compares Cesàro-averaged
empirical Dirac measures cell by cell over a mesh hierarchy.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import lcm

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError
from .stack import VARIABLES, SolutionStack

WEIGHT_TOL = 1e-12
MERGE_TOL = 1e-14
MARGINAL_TOL = 1e-10


@dataclass
class DiscreteMeasure:
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.atoms = np.atleast_2d(np.asarray(self.atoms, dtype=np.float64))
        if self.atoms.ndim != 2 or self.atoms.shape[0] < 1:
            raise ParameterError("a measure needs at least one atom")
        self.weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if self.weights.shape[0] != self.atoms.shape[0]:
            raise ParameterError("one weight per atom is required")
        if np.any(self.weights < 0.0) or abs(self.weights.sum() - 1.0) > WEIGHT_TOL:
            raise ParameterError("weights must be non-negative and sum to 1")

    @classmethod
    def empirical(cls, atoms) -> "DiscreteMeasure":
        atoms = np.atleast_2d(np.asarray(atoms, dtype=np.float64))
        k = atoms.shape[0]
        return cls(atoms, np.full(k, 1.0 / k))

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def merged(self, tol: float = MERGE_TOL) -> "DiscreteMeasure":
        """Combine atoms closer than ``tol`` in every coordinate."""
        keep, w = [], []
        for x, wx in zip(self.atoms, self.weights):
            for k, y in enumerate(keep):
                if np.all(np.abs(x - y) <= tol):
                    w[k] += wx
                    break
            else:
                keep.append(x)
                w.append(wx)
        out = DiscreteMeasure.__new__(DiscreteMeasure)
        out.atoms = np.array(keep)
        out.weights = np.array(w)
        return out


@dataclass
class TransportPlan:
    """Coupling ``plan[i, j]`` between source atom ``i`` and target atom ``j``."""

    plan: np.ndarray

    def marginals(self):
        return self.plan.sum(axis=1), self.plan.sum(axis=0)

    def is_feasible(self, mu: DiscreteMeasure, nu: DiscreteMeasure, tol=MARGINAL_TOL) -> bool:
        rows, cols = self.marginals()
        return (np.all(self.plan >= -tol)
                and np.allclose(rows, mu.weights, rtol=0.0, atol=tol)
                and np.allclose(cols, nu.weights, rtol=0.0, atol=tol))


def cost_matrix(x: np.ndarray, y: np.ndarray, q: float) -> np.ndarray:
    d = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1)
    return d**q


def transport_simplex(a, b, C, max_iter=10_000):
    """Minimize ``sum(C * P)`` over plans with row sums ``a`` and column sums
    ``b`` (``sum(a) == sum(b)``).

    Network simplex on the complete bipartite graph: the basis is a spanning
    tree of ``m + n - 1`` arcs started from the north-west corner rule;
    entering arcs follow Bland's rule so degenerate pivots cannot cycle.
    Returns the optimal plan.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    m, n = C.shape
    P = np.zeros((m, n))
    basis = set()

    # north-west corner: exactly m + n - 1 basic cells, some possibly zero
    ra, rb = a.copy(), b.copy()
    i = j = 0
    while True:
        x = min(ra[i], rb[j])
        P[i, j] = x
        basis.add((i, j))
        ra[i] -= x
        rb[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if j == n - 1 or (i < m - 1 and ra[i] <= rb[j]):
            i += 1
        else:
            j += 1

    scale = max(float(np.max(np.abs(C))), 1.0)
    tol = 1e-12 * scale
    for _ in range(max_iter):
        u, v = _potentials(basis, C, m, n)
        reduced = C - u[:, None] - v[None, :]
        entering = None
        for i in range(m):
            for j in range(n):
                if (i, j) not in basis and reduced[i, j] < -tol:
                    entering = (i, j)
                    break
            if entering is not None:
                break
        if entering is None:
            return np.maximum(P, 0.0)
        cycle = _cycle(basis, entering, m, n)
        # cycle[0] is the entering arc; odd positions lose flow
        minus = cycle[1::2]
        theta = min(P[c] for c in minus)
        leaving = min((c for c in minus if P[c] == theta))
        for k, c in enumerate(cycle):
            P[c] += theta if k % 2 == 0 else -theta
        P[leaving] = 0.0
        basis.remove(leaving)
        basis.add(entering)
    raise RuntimeError("transport simplex did not terminate")


def _tree_adjacency(basis, m, n):
    adj = [[] for _ in range(m + n)]
    for i, j in basis:
        adj[i].append(m + j)
        adj[m + j].append(i)
    return adj


def _potentials(basis, C, m, n):
    """Dual values with ``u_i + v_j = C_ij`` on the basic arcs, ``u_0 = 0``."""
    adj = _tree_adjacency(basis, m, n)
    pot = np.full(m + n, np.nan)
    pot[0] = 0.0
    queue = deque([0])
    while queue:
        k = queue.popleft()
        for l in adj[k]:
            if np.isnan(pot[l]):
                if k < m:
                    pot[l] = C[k, l - m] - pot[k]
                else:
                    pot[l] = C[l, k - m] - pot[k]
                queue.append(l)
    return pot[:m], pot[m:]


def _cycle(basis, entering, m, n):
    """Arcs of the cycle closed by ``entering``, starting with it."""
    i0, j0 = entering
    adj = _tree_adjacency(basis, m, n)
    # tree path from column node j0 to row node i0
    start, goal = m + j0, i0
    prev = {start: None}
    queue = deque([start])
    while queue:
        k = queue.popleft()
        if k == goal:
            break
        for l in adj[k]:
            if l not in prev:
                prev[l] = k
                queue.append(l)
    path = [goal]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    path.reverse()  # start (column j0) ... goal (row i0)
    arcs = [entering]
    for k, l in zip(path, path[1:]):
        arcs.append((l, k - m) if k >= m else (k, l - m))
    return arcs


def wq_distance(mu: DiscreteMeasure, nu: DiscreteMeasure, q: float = 1.0,
                merge: bool = True):
    """Wasserstein-``q`` distance with Euclidean ground cost.

    Returns ``(distance, TransportPlan)``; the plan refers to the atoms of
    the measures as passed in, even when coincident atoms are merged for
    the solve.
    """
    if not q >= 1.0 or not np.isfinite(q):
        raise ParameterError(f"q must be a finite order >= 1, got {q}")
    if mu.dim != nu.dim:
        raise ParameterError(f"atoms live in R^{mu.dim} and R^{nu.dim}")
    if merge:
        mu_s, mi = _merge_index(mu)
        nu_s, ni = _merge_index(nu)
    else:
        mu_s, mi = mu, np.arange(len(mu.weights))
        nu_s, ni = nu, np.arange(len(nu.weights))
    C = cost_matrix(mu_s.atoms, nu_s.atoms, q)
    P = transport_simplex(mu_s.weights, nu_s.weights, C)
    value = float(np.sum(P * C)) ** (1.0 / q)
    return value, TransportPlan(_unmerge(P, mu, mi, nu, ni))


def _merge_index(mu: DiscreteMeasure):
    merged = mu.merged()
    idx = np.empty(len(mu.weights), dtype=int)
    for k, x in enumerate(mu.atoms):
        idx[k] = int(np.argmax(np.all(np.abs(merged.atoms - x) <= MERGE_TOL, axis=1)))
    return merged, idx


def _unmerge(P, mu, mi, nu, ni):
    # split merged mass back proportionally to the original weights
    wm = np.bincount(mi, weights=mu.weights)
    wn = np.bincount(ni, weights=nu.weights)
    with np.errstate(invalid="ignore", divide="ignore"):
        fm = np.where(wm[mi] > 0, mu.weights / wm[mi], 0.0)
        fn = np.where(wn[ni] > 0, nu.weights / wn[ni], 0.0)
    return P[np.ix_(mi, ni)] * fm[:, None] * fn[None, :]


E4_COMPONENTS = {
    "tuple": VARIABLES,
    "marginal": ("rho", "m1", "m2", "S"),
}


def resolve_components(components):
    if isinstance(components, str):
        if components in E4_COMPONENTS:
            return tuple(E4_COMPONENTS[components])
        components = (components,)
    components = tuple(components)
    for c in components:
        if c not in VARIABLES:
            raise ParameterError(f"unknown measure component {c!r}")
    return components


def atom_fields(stack: SolutionStack, components, target_n, scaling=None):
    """Array ``(levels, N, N, d)`` of per-level atom coordinates."""
    comps = resolve_components(components)
    scaling = np.ones(len(comps)) if scaling is None else np.asarray(scaling, dtype=np.float64)
    if scaling.shape != (len(comps),):
        raise ParameterError("one scaling factor per component is required")
    cols = [stack.fields(c, target_n=target_n) * s for c, s in zip(comps, scaling)]
    return np.stack(cols, axis=-1)


def wq_field(stack_a: SolutionStack, stack_b: SolutionStack, q: float = 1.0,
             components="tuple", scaling=None, method="assignment") -> np.ndarray:
    """Per-cell ``W_q`` between the empirical measures of two stacks on the
    common finest grid."""
    N = max(stack_a.finest, stack_b.finest)
    A = atom_fields(stack_a, components, N, scaling)
    B = atom_fields(stack_b, components, N, scaling)
    if A.shape == B.shape and np.array_equal(A, B):
        return np.zeros((N, N))
    ka, kb, d = A.shape[0], B.shape[0], A.shape[-1]
    A = A.reshape(ka, N * N, d)
    B = B.reshape(kb, N * N, d)
    # cost[c, i, j] = |A_i - B_j|^q at cell c
    cost = np.linalg.norm(A[:, None] - B[None, :], axis=-1).transpose(2, 0, 1) ** q
    if ka == 1 or kb == 1:
        return (cost.mean(axis=(1, 2)) ** (1.0 / q)).reshape(N, N)
    out = np.empty(N * N)
    if method == "assignment":
        L = lcm(ka, kb)
        ra, rb = L // ka, L // kb
        for c in range(N * N):
            CE = np.repeat(np.repeat(cost[c], ra, axis=0), rb, axis=1)
            r, s = linear_sum_assignment(CE)
            out[c] = CE[r, s].sum() / L
    elif method == "simplex":
        wa, wb = np.full(ka, 1.0 / ka), np.full(kb, 1.0 / kb)
        for c in range(N * N):
            out[c] = np.sum(transport_simplex(wa, wb, cost[c]) * cost[c])
    else:
        raise ParameterError(f"unknown method {method!r}")
    return (np.maximum(out, 0.0) ** (1.0 / q)).reshape(N, N)


def e4_field(stack_a: SolutionStack, stack_b: SolutionStack, q: float = 1.0,
             components="tuple", scaling=None, method="assignment") -> float:
    """``L^q`` norm over the unit square of the per-cell Wasserstein field."""
    W = wq_field(stack_a, stack_b, q, components, scaling, method)
    N = W.shape[0]
    return float((np.sum(W**q) / (N * N)) ** (1.0 / q))
