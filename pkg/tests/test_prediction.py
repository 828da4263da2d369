import numpy as np
import pytest

from alipmpc.model import AlipParams
from alipmpc.prediction import (
    HorizonPrediction,
    build_prediction,
    discretize_at,
    rank_check,
)
from alipmpc.trajectory import StairGeometry, synthesize_orbit

P32 = AlipParams(32.0, 9.81)
RNG = np.random.default_rng(11)


@pytest.fixture(scope="module")
def stair_orbit():
    return synthesize_orbit(StairGeometry(0.28, 0.17, 5), P32, 0.4, 0.9, -0.21)


@pytest.fixture(scope="module")
def unit_orbit():
    # constant pendulum length of exactly 1 m
    return synthesize_orbit(StairGeometry(0.0, 0.0, 1), P32, 0.4, 1.0, 0.0)


def simulate(orbit, t0, N, dt, x0, u, p=P32):
    """Unrolled-simulation oracle: step x through A_j x + b_j u_j plus the
    same nominal jump whenever (t_j, t_j+dt] crosses a multiple of T."""
    from alipmpc.prediction import _impacts_crossed, _nominal_impact_jump

    x = np.array(x0, dtype=float)
    jump = _nominal_impact_jump(orbit)
    for j in range(N):
        t_j = t0 + j * dt
        step = discretize_at(orbit, t_j, dt, p)
        x = step.A @ x + step.b * u[j]
        x = x + _impacts_crossed(t_j, t_j + dt, orbit.T) * jump
    return x


def test_discretize_identity_limit(unit_orbit):
    step = discretize_at(unit_orbit, 0.1, 1e-15, P32)
    assert np.allclose(step.A, np.eye(2), atol=1e-12)
    assert np.allclose(step.b, 0.0, atol=1e-12)


def test_discretize_hand_values(unit_orbit):
    step = discretize_at(unit_orbit, 0.2, 0.01, P32)
    assert step.A == pytest.approx(
        np.array([[1.0, 3.125e-4], [3.1392, 1.0]]), rel=1e-12
    )
    assert step.b == pytest.approx(np.array([0.0, 0.01]), abs=1e-15)


def test_discretize_time_invariant_for_constant_length(unit_orbit):
    s1 = discretize_at(unit_orbit, 0.05, 0.01, P32)
    s2 = discretize_at(unit_orbit, 0.31, 0.01, P32)
    assert (s1.A == s2.A).all() and (s1.b == s2.b).all()


def test_discretize_rejects_bad_dt(unit_orbit):
    with pytest.raises(ValueError):
        discretize_at(unit_orbit, 0.0, 0.0, P32)


def test_single_sample_horizon(stair_orbit):
    pred = build_prediction(stair_orbit, 0.05, 1, 0.01, P32)
    step = discretize_at(stair_orbit, 0.05, 0.01, P32)
    assert np.array_equal(pred.S, step.A)
    assert np.array_equal(pred.Gamma[:, 0], step.b)
    assert np.allclose(pred.impact_offsets, 0.0)


def test_two_sample_unroll_constant_matrices(unit_orbit):
    pred = build_prediction(unit_orbit, 0.0, 2, 0.01, P32)
    step = discretize_at(unit_orbit, 0.0, 0.01, P32)
    assert np.allclose(pred.S, step.A @ step.A, atol=1e-15)
    assert np.allclose(pred.Gamma[:, 0], step.A @ step.b, atol=1e-15)
    assert np.allclose(pred.Gamma[:, 1], step.b, atol=1e-15)


def test_terminal_matches_simulation_within_step(stair_orbit):
    N, dt = 5, 0.01
    t0 = 0.12
    pred = build_prediction(stair_orbit, t0, N, dt, P32)
    for _ in range(20):
        x0 = RNG.uniform(-1, 1, 2)
        u = RNG.uniform(-20, 20, N)
        x_pred = pred.S @ x0 + pred.Gamma @ u + pred.impact_offsets[-1]
        x_sim = simulate(stair_orbit, t0, N, dt, x0, u)
        scale = 1 + np.abs(x0).max() + np.abs(u).max()
        assert np.abs(x_pred - x_sim).max() <= 1e-12 * scale


def test_terminal_matches_simulation_across_impacts(stair_orbit):
    # horizon starting mid-step and spanning two boundaries
    N, dt = 60, 0.01
    t0 = 0.25
    pred = build_prediction(stair_orbit, t0, N, dt, P32)
    assert np.any(np.abs(pred.impact_offsets) > 0)
    for _ in range(20):
        x0 = RNG.uniform(-1, 1, 2)
        u = RNG.uniform(-20, 20, N)
        x_pred = pred.S @ x0 + pred.Gamma @ u + pred.impact_offsets[-1]
        x_sim = simulate(stair_orbit, t0, N, dt, x0, u)
        scale = 1 + np.abs(x0).max() + np.abs(u).max()
        assert np.abs(x_pred - x_sim).max() <= 1e-11 * scale


def test_stage_maps_match_simulation(stair_orbit):
    N, dt, t0 = 46, 0.01, 0.1
    pred = build_prediction(stair_orbit, t0, N, dt, P32)
    x0 = np.array([0.03, -1.2])
    u = RNG.uniform(-10, 10, N)
    for j in range(N):
        S_j, G_j = pred.stage_maps(j)
        x_stage = S_j @ x0 + G_j @ u[: j + 1] + pred.impact_offsets[j]
        x_sim = simulate(stair_orbit, t0, j + 1, dt, x0, u)
        assert np.abs(x_stage - x_sim).max() <= 1e-11 * (1 + np.abs(u).max())


def test_stage_map_composition(stair_orbit):
    # continuing from an intermediate stage reproduces the terminal map
    N, dt, t0 = 12, 0.01, 0.02
    pred = build_prediction(stair_orbit, t0, N, dt, P32)
    j = 4
    tail = build_prediction(stair_orbit, t0 + (j + 1) * dt, N - j - 1, dt, P32)
    x0 = np.array([-0.01, 2.0])
    u = RNG.uniform(-5, 5, N)
    S_j, G_j = pred.stage_maps(j)
    x_mid = S_j @ x0 + G_j @ u[: j + 1] + pred.impact_offsets[j]
    x_end = tail.S @ x_mid + tail.Gamma @ u[j + 1 :] + tail.impact_offsets[-1]
    x_full = pred.S @ x0 + pred.Gamma @ u + pred.impact_offsets[-1]
    assert np.abs(x_end - x_full).max() <= 1e-12 * (1 + np.abs(x_full).max())


def test_last_stage_is_terminal(stair_orbit):
    pred = build_prediction(stair_orbit, 0.0, 8, 0.01, P32)
    S_last, G_last = pred.stage_maps(7)
    assert np.array_equal(S_last, pred.S)
    assert np.array_equal(G_last, pred.Gamma)


def test_horizon_cap(stair_orbit):
    with pytest.raises(ValueError):
        build_prediction(stair_orbit, 0.0, 201, 0.01, P32)  # > 5T
    build_prediction(stair_orbit, 0.0, 200, 0.01, P32)  # == 5T is allowed
    with pytest.raises(ValueError):
        build_prediction(stair_orbit, 0.0, 0, 0.01, P32)


def test_rank_check_single_sample(stair_orbit):
    assert rank_check(build_prediction(stair_orbit, 0.0, 1, 0.01, P32)) is False


@pytest.mark.parametrize("N", [2, 3, 10, 40])
def test_rank_check_full_rank(stair_orbit, N):
    assert rank_check(build_prediction(stair_orbit, 0.03, N, 0.01, P32)) is True


def test_rank_check_duplicate_columns_fails():
    # A = I makes Gamma = [b, b], which has row rank 1
    b = np.array([0.0, 0.01])
    gamma = np.column_stack([b, b])
    pred = HorizonPrediction(
        S=np.eye(2),
        Gamma=gamma,
        stage_S=np.stack([np.eye(2)] * 2),
        stage_Gamma_padded=np.zeros((2, 2, 2)),
        impact_offsets=np.zeros((2, 2)),
        N=2,
        dt=0.01,
        t0=0.0,
    )
    assert rank_check(pred) is False
