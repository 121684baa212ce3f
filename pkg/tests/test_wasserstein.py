import numpy as np
import pytest
from scipy.optimize import linprog

from oracles import transport_vertex_enumeration
from kconv.errors import ParameterError
from kconv.euler import ConservedField, GasModel, Grid2D
from kconv.stack import SolutionStack
from kconv.wasserstein import (
    DiscreteMeasure, cost_matrix, e4_field, transport_simplex, wq_distance, wq_field,
)


def random_measure(rng, k, d=3):
    w = rng.random(k) + 0.05
    return DiscreteMeasure(rng.normal(size=(k, d)), w / w.sum())


def test_oracle_agrees_with_linprog():
    # the brute-force oracle itself, checked against an unrelated LP solver
    rng = np.random.default_rng(0)
    for _ in range(10):
        mu, nu = random_measure(rng, 3), random_measure(rng, 4)
        C = cost_matrix(mu.atoms, nu.atoms, 1.0)
        m, n = C.shape
        A = np.vstack([np.kron(np.eye(m), np.ones(n)), np.kron(np.ones(m), np.eye(n))])
        lp = linprog(C.ravel(), A_eq=A, b_eq=np.concatenate([mu.weights, nu.weights]), method="highs")
        assert transport_vertex_enumeration(mu.weights, nu.weights, C) == pytest.approx(lp.fun, abs=1e-10)


def test_dirac_pair():
    a, b = np.array([[0.0, 1.0, 2.0]]), np.array([[3.0, 5.0, 2.0]])
    for q in (1.0, 1.5, 3.0):
        d, plan = wq_distance(DiscreteMeasure.empirical(a), DiscreteMeasure.empirical(b), q)
        assert d == pytest.approx(5.0, rel=1e-14)
        assert plan.plan.shape == (1, 1)


def test_identical_measures():
    rng = np.random.default_rng(1)
    mu = random_measure(rng, 4)
    d, plan = wq_distance(mu, mu)
    assert d == pytest.approx(0.0, abs=1e-14)
    np.testing.assert_allclose(plan.plan, np.diag(mu.weights), atol=1e-14)


def test_split_mass_on_the_line():
    mu = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    nu = DiscreteMeasure([[0.5]], [1.0])
    assert wq_distance(mu, nu)[0] == pytest.approx(0.5)


def test_errors():
    with pytest.raises(ParameterError):
        DiscreteMeasure([[0.0]], [0.5])
    with pytest.raises(ParameterError):
        DiscreteMeasure([[0.0], [1.0]], [1.5, -0.5])
    with pytest.raises(ParameterError):
        wq_distance(DiscreteMeasure([[0.0, 1.0]], [1.0]), DiscreteMeasure([[0.0]], [1.0]))
    with pytest.raises(ParameterError):
        wq_distance(DiscreteMeasure([[0.0]], [1.0]), DiscreteMeasure([[0.0]], [1.0]), q=0.5)


def test_coincident_atoms_are_merged():
    mu = DiscreteMeasure([[0.0], [0.0], [2.0]], [0.25, 0.25, 0.5])
    nu = DiscreteMeasure([[0.0], [2.0]], [0.5, 0.5])
    d, plan = wq_distance(mu, nu)
    assert d == pytest.approx(0.0, abs=1e-15)
    assert plan.plan.shape == (3, 2)
    assert plan.is_feasible(mu, nu)


@pytest.mark.parametrize("m, n", [(4, 5), (3, 3), (2, 4), (5, 1)])
def test_matches_vertex_enumeration(m, n):
    rng = np.random.default_rng(m * 10 + n)
    for _ in range(20):
        mu, nu = random_measure(rng, m), random_measure(rng, n)
        for q in (1.0, 2.0):
            d, plan = wq_distance(mu, nu, q)
            ref = transport_vertex_enumeration(mu.weights, nu.weights, cost_matrix(mu.atoms, nu.atoms, q))
            assert d**q == pytest.approx(ref, abs=1e-9)
            assert plan.is_feasible(mu, nu)
            C = cost_matrix(mu.atoms, nu.atoms, q)
            assert np.sum(plan.plan * C) ** (1 / q) == pytest.approx(d, rel=1e-10)


def test_degenerate_supplies():
    # equal marginals make north-west corner degenerate at every step
    a = np.full(4, 0.25)
    C = np.random.default_rng(3).random((4, 4))
    P = transport_simplex(a, a, C)
    assert np.sum(P * C) == pytest.approx(transport_vertex_enumeration(a, a, C), abs=1e-12)


def test_scaling():
    rng = np.random.default_rng(4)
    mu, nu = random_measure(rng, 3), random_measure(rng, 4)
    d = wq_distance(mu, nu, 1.5)[0]
    lam = 3.7
    d2 = wq_distance(DiscreteMeasure(lam * mu.atoms, mu.weights),
                     DiscreteMeasure(lam * nu.atoms, nu.weights), 1.5)[0]
    assert d2 == pytest.approx(lam * d, rel=1e-12)


def _stack(values_by_n, gas):
    levels = []
    for n, rho in values_by_n:
        U = np.zeros((4, n, n))
        U[0] = rho
        U[3] = 3.0
        levels.append((n, ConservedField(Grid2D(n), U)))
    return SolutionStack(levels, gas, 1.0)


def test_e4_prefix_equals_full_is_zero():
    gas = GasModel(1.4)
    rng = np.random.default_rng(5)
    s = _stack([(2, 1 + rng.random((2, 2))), (4, 1 + rng.random((4, 4)))], gas)
    assert e4_field(s, s) == 0.0


def test_e4_single_levels_is_l1_distance_of_tuples():
    gas = GasModel(1.4)
    rng = np.random.default_rng(6)
    a = _stack([(4, 1 + rng.random((4, 4)))], gas)
    b = _stack([(4, 1 + rng.random((4, 4)))], gas)
    from kconv.wasserstein import atom_fields
    diff = np.linalg.norm(atom_fields(a, "tuple", 4)[0] - atom_fields(b, "tuple", 4)[0], axis=-1)
    assert e4_field(a, b) == pytest.approx(diff.mean(), rel=1e-14)


def test_assignment_and_simplex_routes_agree():
    gas = GasModel(1.4)
    rng = np.random.default_rng(7)
    full = _stack([(2, 1 + rng.random((2, 2))), (4, 1 + rng.random((4, 4))),
                   (8, 1 + rng.random((8, 8)))], gas)
    a = wq_field(full.prefix(2), full, method="assignment")
    b = wq_field(full.prefix(2), full, method="simplex")
    np.testing.assert_allclose(a, b, atol=1e-13)
