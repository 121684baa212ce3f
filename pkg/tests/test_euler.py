import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kconv import euler
from kconv.errors import DomainError, ParameterError
from kconv.euler import ConservedField, GasModel, Grid2D

G = GasModel(1.4)

pos = st.floats(0.05, 20.0)
vel = st.floats(-5.0, 5.0)


def cons(rho, m1, m2, E):
    return np.array([rho, m1, m2, E], dtype=float)


def test_gas_model_coefficient():
    g = GasModel(1.4, -0.3)
    assert g.a_coeff == math.exp((1.4 - 1.0) * -0.3)
    with pytest.raises(ParameterError):
        GasModel(1.0)


def test_grid_geometry():
    g = Grid2D(64)
    assert g.h * g.n == pytest.approx(1.0, abs=1e-16)
    x1, x2 = g.centers()
    assert x1[3, 5] == pytest.approx(3.5 / 64)
    assert x2[3, 5] == pytest.approx(5.5 / 64)
    with pytest.raises(ParameterError):
        Grid2D(1)


@pytest.mark.parametrize("U, p", [
    (cons(1.0, 0.0, 0.0, 2.5), 1.0),
    (cons(2.0, -1.0, 0.0, 6.5), 2.5),
])
def test_pressure_examples(U, p):
    assert euler.pressure(U, G) == pytest.approx(p, rel=1e-15)


def test_pressure_zero_internal_energy_is_rejected():
    U = cons(1.0, 1.0, 0.0, 0.5)
    assert euler.pressure(U, G) == 0.0
    with pytest.raises(DomainError):
        euler.pressure(U, G, require_positive=True)


def test_nonpositive_density_names_the_cell():
    U = np.ones((4, 3, 3))
    U[0, 1, 2] = 0.0
    with pytest.raises(DomainError) as exc:
        euler.pressure(U, G)
    assert exc.value.cell == (1, 2)


def test_temperature_examples():
    assert euler.temperature(cons(1, 0, 0, 2.5), G) == pytest.approx(1.0)
    assert euler.temperature(cons(2, 0, 0, 5.0), G) == pytest.approx(1.0)


def test_specific_entropy_examples():
    assert euler.specific_entropy(cons(1, 0, 0, 2.5), G) == pytest.approx(0.0, abs=1e-15)
    # rho = e, theta = 1 -> p = e, E = e / 0.4
    assert euler.specific_entropy(cons(math.e, 0, 0, math.e / 0.4), G) == pytest.approx(-1.0)


def test_total_entropy_shift():
    U = cons(2.0, 0.0, 0.0, 5.0)
    s = float(euler.specific_entropy(U, G))
    assert euler.total_entropy(U, G.with_floor(s)) == 0.0
    # rho = 2, s = 1: theta = exp(0.4) * 2**0.4
    theta = math.exp(0.4 * (1.0 + math.log(2.0)))
    U = cons(2.0, 0.0, 0.0, 2.0 * theta / 0.4)
    assert euler.total_entropy(U, G) == pytest.approx(2.0, rel=1e-12)


def test_total_entropy_nonnegative_on_kh_states():
    prims = np.array([[1.0, 0.5, 0.0, 2.5], [2.0, -0.5, 0.0, 2.5]]).T
    U = euler.primitive_to_conserved(prims, G)
    gas = G.with_floor_from(U)
    assert np.all(euler.total_entropy(U, gas) >= 0.0)


def test_energy_of_reference_state():
    assert euler.total_energy_of(1.0, np.zeros(2), 0.0, G) == pytest.approx(2.5, rel=1e-15)


def test_primitive_examples():
    U = euler.primitive_to_conserved([1.0, 0.5, 0.0, 2.5], G)
    np.testing.assert_allclose(U, [1.0, 0.5, 0.0, 6.375], rtol=1e-15)
    U = euler.primitive_to_conserved([2.0, -0.5, 0.0, 2.5], G)
    np.testing.assert_allclose(U, [2.0, -1.0, 0.0, 6.5], rtol=1e-15)
    with pytest.raises(DomainError):
        euler.primitive_to_conserved([1.0, 0.0, 0.0, -1.0], G)


def test_primitive_round_trip_random():
    rng = np.random.default_rng(3)
    W = np.stack([rng.uniform(0.1, 10, 1000), rng.uniform(-3, 3, 1000),
                  rng.uniform(-3, 3, 1000), rng.uniform(0.1, 10, 1000)])
    back = euler.conserved_to_primitive(euler.primitive_to_conserved(W, G), G)
    np.testing.assert_allclose(back, W, rtol=1e-13, atol=1e-13)


@given(pos, vel, vel, pos)
def test_eos_consistency(rho, u1, u2, p):
    U = euler.primitive_to_conserved([rho, u1, u2, p], G)
    th = euler.temperature(U, G)
    assert th * rho == pytest.approx(float(euler.pressure(U, G)), rel=4e-16)


@given(pos, vel, vel, pos, st.floats(-2.0, 2.0))
def test_energy_entropy_round_trip(rho, u1, u2, p, floor):
    gas = GasModel(1.4, floor)
    U = euler.primitive_to_conserved([rho, u1, u2, p], gas)
    E = euler.total_energy_of(U[0], U[1:3], euler.total_entropy(U, gas), gas)
    assert E == pytest.approx(U[3], rel=1e-12)


@given(pos, vel, vel, st.floats(-3, 3), pos, vel, vel, st.floats(-3, 3))
def test_energy_convexity(r0, a0, b0, s0, r1, a1, b1, s1):
    E = lambda r, m1, m2, S: float(euler.total_energy_of(r, np.array([m1, m2]), S, G))
    e0, e1 = E(r0, a0, b0, s0), E(r1, a1, b1, s1)
    mid = E(0.5 * (r0 + r1), 0.5 * (a0 + a1), 0.5 * (b0 + b1), 0.5 * (s0 + s1))
    assert mid <= 0.5 * (e0 + e1) + 1e-12 * max(e0, e1)


@given(pos, st.floats(-3, 3), st.floats(0.01, 3))
def test_energy_increasing_in_entropy(rho, S, dS):
    assert euler.total_energy_of(rho, np.zeros(2), S + dS, G) > euler.total_energy_of(rho, np.zeros(2), S, G)


def test_pure_functions_are_bitwise_repeatable():
    rng = np.random.default_rng(0)
    U = euler.primitive_to_conserved(np.stack([1 + rng.random(50), rng.random(50),
                                               rng.random(50), 1 + rng.random(50)]), G)
    a = euler.total_entropy(U, G)
    b = euler.total_entropy(U.copy(), G)
    assert a.tobytes() == b.tobytes()


def test_conserved_field_checks():
    g = Grid2D(4)
    U = np.ones((4, 4, 4))
    U[3] = 3.0
    f = ConservedField(g, U)
    assert f.totals()[0] == pytest.approx(1.0)
    U[3, 2, 1] = 0.1
    with pytest.raises(DomainError) as exc:
        ConservedField(g, U)
    assert exc.value.cell == (2, 1)
    with pytest.raises(ParameterError):
        ConservedField(g, np.ones((4, 3, 3)))


def test_transpose_swaps_momenta():
    rng = np.random.default_rng(1)
    U = np.ones((4, 5, 5)) * 3.0
    U[1] = rng.random((5, 5))
    U[2] = rng.random((5, 5))
    f = ConservedField(Grid2D(5), U)
    t = f.transpose()
    np.testing.assert_array_equal(t.U[1], U[2].T)
    np.testing.assert_array_equal(t.transpose().U, U)


def test_physical_flux_directions():
    W = np.array([2.0, 0.3, -0.4, 1.5])
    fx = euler.physical_flux(W, G, 0)
    fy = euler.physical_flux(W[[0, 2, 1, 3]], G, 1)
    np.testing.assert_allclose(fx[[0, 1, 2, 3]], fy[[0, 2, 1, 3]], rtol=1e-15)
    E = 1.5 / 0.4 + 0.5 * 2.0 * (0.09 + 0.16)
    np.testing.assert_allclose(fx, [0.6, 2 * 0.09 + 1.5, 2 * 0.3 * -0.4, 0.3 * (E + 1.5)])
