import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state
from kconv import euler
from kconv.bench import PerturbationSpec, kh_initial, sod_initial
from kconv.errors import ParameterError, StepRejected
from kconv.euler import ConservedField, GasModel, Grid2D
from kconv.flm import (
    FaceTrace, FlmParams, entropy_diagnostic, flm_face_fluxes, flm_step, numerical_flux,
    run_flm, stable_dt, upwind_part, upwind_part_central,
)
from kconv.riemann import exact_riemann

G = GasModel(1.4)
val = st.floats(-10, 10)


def test_face_trace_brackets():
    t = FaceTrace(1.0, 4.0)
    assert t.jump == 3.0
    assert t.average == 2.5


@pytest.mark.parametrize("u, expected", [(2.0, 2.0), (-2.0, -6.0)])
def test_upwind_picks_the_upwind_side(u, expected):
    assert upwind_part(FaceTrace(1.0, 3.0), FaceTrace(u, u)) == expected


@given(val, val, val)
def test_upwind_central_form_agrees(ri, ro, u):
    r, v = FaceTrace(ri, ro), FaceTrace(u, u)
    assert upwind_part(r, v) == pytest.approx(upwind_part_central(r, v), rel=1e-14, abs=1e-13)


@given(val, val)
def test_upwind_zero_jump_is_central(r, u):
    assert upwind_part(FaceTrace(r, r), FaceTrace(u, u)) == r * u


def test_upwind_vector_velocity_uses_normal():
    u = FaceTrace(np.array([1.0, 5.0]), np.array([3.0, -5.0]), normal=(0.0, 1.0))
    # <u>.n = 0 -> no advective flux
    assert upwind_part(FaceTrace(1.0, 3.0), u) == 0.0


def test_numerical_flux_examples():
    r, u = FaceTrace(2.0, 2.0), FaceTrace(0.7, 0.7)
    assert numerical_flux(r, u, 0.3) == upwind_part(r, u)
    assert numerical_flux(FaceTrace(0.0, 2.0), FaceTrace(0.0, 0.0), 1.0) == -2.0
    # (1/64)**0.8 = 2**-4.8
    assert FlmParams().mu(1 / 64) == pytest.approx(2.0**-4.8, rel=1e-15)
    with pytest.raises(ParameterError):
        numerical_flux(r, u, -1.0)


def test_params_validation():
    with pytest.raises(ParameterError):
        FlmParams(alpha=2.0)
    with pytest.raises(ParameterError):
        FlmParams(beta=1.0)
    p = FlmParams(variant="plain_upwind")
    assert p.mu(0.1) == 0.0 and p.velocity_penalty(0.1) == 0.0


def test_constant_state_is_a_fixed_point():
    U = euler.primitive_to_conserved(np.broadcast_to(np.array([1.3, 0.4, -0.2, 2.0])[:, None, None],
                                                     (4, 16, 16)), G)
    s = ConservedField(Grid2D(16), U)
    out = flm_step(s, FlmParams(), G, 1e-3)
    assert out.U.tobytes() == s.U.tobytes()


@pytest.mark.parametrize("variant", ["flm", "plain_upwind"])
def test_step_conserves_all_totals(variant):
    rng = np.random.default_rng(7)
    s = random_state(32, rng, G)
    params = FlmParams(variant=variant)
    out = flm_step(s, params, G, stable_dt(s, params, G))
    before, after = s.U.sum(axis=(1, 2)), out.U.sum(axis=(1, 2))
    np.testing.assert_allclose(after[[0, 3]], before[[0, 3]], rtol=1e-13)
    scale = np.abs(s.U[1:3]).sum()
    assert np.all(np.abs(after[1:3] - before[1:3]) <= 1e-13 * scale)


def test_face_flux_antisymmetry_bitwise():
    rng = np.random.default_rng(11)
    s = random_state(12, rng, G)
    p = euler.pressure(s.U, G)
    F = flm_face_fluxes(s.U, p, 0, 0.05, 0.3, "wrap")
    # reflect x1 -> -x1: the same faces seen from the other side
    M = s.U[:, ::-1, :].copy()
    M[1] = -M[1]
    Fm = flm_face_fluxes(M, p[::-1, :].copy(), 0, 0.05, 0.3, "wrap")[:, ::-1, :]
    sign = np.array([-1.0, 1.0, -1.0, -1.0])[:, None, None]
    assert np.array_equal(Fm, sign * F)


def test_transpose_commutes_with_step():
    rng = np.random.default_rng(5)
    s = random_state(16, rng, G)
    params = FlmParams()
    a = flm_step(s.transpose(), params, G, 1e-3).U
    b = flm_step(s, params, G, 1e-3).transpose().U
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-14)


def test_stable_dt_examples():
    # at rest with c = 1: p = rho / gamma
    U = euler.primitive_to_conserved(np.stack([np.ones((64, 64)), np.zeros((64, 64)),
                                               np.zeros((64, 64)), np.full((64, 64), 1 / 1.4)]), G)
    s = ConservedField(Grid2D(64), U)
    assert stable_dt(s, 0.4, G) == pytest.approx(3.125e-3, rel=1e-14)
    rng = np.random.default_rng(2)
    s = random_state(16, rng, G)
    W = euler.conserved_to_primitive(s.U, G)
    W[1:3] *= 2.0
    faster = ConservedField(s.grid, euler.primitive_to_conserved(W, G))
    assert stable_dt(faster, 0.4, G) <= stable_dt(s, 0.4, G)
    fine = ConservedField(Grid2D(32), np.repeat(np.repeat(s.U, 2, 1), 2, 2))
    assert stable_dt(fine, 0.4, G) == pytest.approx(0.5 * stable_dt(s, 0.4, G), rel=1e-14)


def test_step_rejection_carries_cell():
    s = sod_initial(Grid2D(16, "transmissive"), G)
    with pytest.raises(StepRejected) as exc:
        flm_step(s, FlmParams(), G, 1.0)
    assert exc.value.cell is not None


def test_run_single_step_equals_flm_step():
    rng = np.random.default_rng(9)
    s = random_state(16, rng, G)
    params = FlmParams()
    dt = stable_dt(s, params, G)
    final, trace = run_flm(s, params, G, dt)
    assert len(trace) == 2
    assert final.U.tobytes() == flm_step(s, params, G, dt).U.tobytes()


def test_run_lands_on_snapshot_times():
    rng = np.random.default_rng(4)
    s = random_state(16, rng, G)
    seen = []
    run_flm(s, FlmParams(), G, 0.05, observers=[lambda t, st: seen.append(t)], snapshot_times=(0.01, 0.03))
    assert seen == [0.01, 0.03, 0.05]


def test_entropy_diagnostic_zero_for_identical_states():
    rng = np.random.default_rng(8)
    s = random_state(8, rng, G)
    assert entropy_diagnostic(s, s.copy(), 0.1, G) == 0.0


def test_entropy_stability_short_kh_run():
    gas0 = GasModel(1.4)
    s = kh_initial(Grid2D(32), PerturbationSpec(seed=3), gas0)
    gas = gas0.with_floor_from(s)
    _, trace = run_flm(s, FlmParams(), gas, 0.2)
    assert trace.column("entropy_residual").min() >= -1e-10
    assert np.diff(trace.column("min_s")).min() >= -1e-10


def test_flm_sod_matches_exact_solution():
    grid = Grid2D(128, "transmissive")
    final, _ = run_flm(sod_initial(grid, G), FlmParams(), G, 0.2)
    x = grid.centers_1d()
    exact = exact_riemann([1.0, 0.0, 1.0], [0.125, 0.0, 0.1], G, (x - 0.5) / 0.2)[0]
    err = np.mean(np.abs(final.rho - exact[:, None]))
    assert err < 0.02
    # y-invariant data stay y-invariant
    assert np.ptp(final.rho, axis=1).max() == 0.0
