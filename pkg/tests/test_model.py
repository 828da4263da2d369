import math

import pytest
from hypothesis import given, strategies as st

from alipmpc.errors import AlipDomainError
from alipmpc.model import (
    AlipParams,
    AlipState,
    PlanarVec,
    com_angle,
    com_velocity_from_state,
    impact_transfer,
    linearized_dynamics,
    nonlinear_dynamics,
    pendulum_length,
    wedge,
)

P32 = AlipParams(m=32.0, g=9.81)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


def test_com_angle_upright():
    assert com_angle(PlanarVec(0.0, 1.0)) == 0.0


def test_com_angle_diagonal():
    assert com_angle(PlanarVec(1.0, 1.0)) == pytest.approx(math.pi / 4, abs=1e-15)


def test_com_angle_derived():
    # independent scalar arctan evaluation
    assert com_angle(PlanarVec(-0.2, 0.95)) == pytest.approx(
        math.atan(-0.2 / 0.95), abs=1e-15
    )
    assert com_angle(PlanarVec(-0.2, 0.95)) == pytest.approx(-0.2074962, abs=1e-6)


def test_com_angle_rejects_nonpositive_z():
    with pytest.raises(AlipDomainError):
        com_angle(PlanarVec(0.1, 0.0))
    with pytest.raises(AlipDomainError):
        com_angle(PlanarVec(0.1, -0.5))


def test_pendulum_length():
    assert pendulum_length(PlanarVec(0.0, 1.0)) == 1.0
    assert pendulum_length(PlanarVec(3.0, 4.0)) == 5.0
    assert pendulum_length(PlanarVec(-0.2, 0.95)) == pytest.approx(
        math.sqrt(0.04 + 0.9025), rel=1e-15
    )
    with pytest.raises(AlipDomainError):
        pendulum_length(PlanarVec(0.0, 0.0))


def test_nonlinear_equilibrium():
    d = nonlinear_dynamics(AlipState(0.0, 0.0), 1.0, 0.0, 0.0, P32)
    assert d.dtheta_c == 0.0 and d.dL == 0.0


def test_nonlinear_pure_rotation():
    d = nonlinear_dynamics(AlipState(0.0, 32.0), 1.0, 0.0, 0.0, P32)
    assert d.dtheta_c == pytest.approx(1.0, rel=1e-15)
    assert d.dL == 0.0


def test_nonlinear_derived_point():
    # direct evaluation: dtheta = 5/32, dL = 32*9.81*sin(0.1) + 2
    d = nonlinear_dynamics(AlipState(0.1, 5.0), 1.0, 0.0, 2.0, P32)
    assert d.dtheta_c == pytest.approx(0.15625, rel=1e-12)
    assert d.dL == pytest.approx(32 * 9.81 * math.sin(0.1) + 2, rel=1e-12)
    assert d.dL == pytest.approx(33.3397, abs=1e-4)


def test_linearized_derived_point():
    d = linearized_dynamics(AlipState(0.1, 5.0), 1.0, 2.0, P32)
    assert d.dtheta_c == pytest.approx(0.15625, rel=1e-12)
    assert d.dL == pytest.approx(33.392, abs=1e-10)


def test_linearization_gap_bounded_over_operating_range():
    # |dL_nl - dL_lin| <= m g r (|theta| - sin|theta|) for |theta| <= 0.21
    m, g, r = 32.0, 9.81, 0.87
    p = AlipParams(m, g)
    for k in range(-21, 22):
        theta = k / 100.0
        s = AlipState(theta, 3.0)
        gap = abs(
            nonlinear_dynamics(s, r, 0.0, 0.0, p).dL
            - linearized_dynamics(s, r, 0.0, p).dL
        )
        assert gap <= m * g * r * (abs(theta) - math.sin(abs(theta))) + 1e-12


def test_dynamics_reject_bad_length():
    with pytest.raises(AlipDomainError):
        nonlinear_dynamics(AlipState(0.0, 0.0), 0.0, 0.0, 0.0, P32)
    with pytest.raises(AlipDomainError):
        linearized_dynamics(AlipState(0.0, 0.0), -1.0, 0.0, P32)


@given(theta=st.floats(-0.3, 0.3), L=finite, tau=finite)
def test_nonlinear_odd_symmetry(theta, L, tau):
    d = nonlinear_dynamics(AlipState(theta, L), 0.9, 0.0, tau, P32)
    d_neg = nonlinear_dynamics(AlipState(-theta, -L), 0.9, 0.0, -tau, P32)
    assert d_neg.dtheta_c == pytest.approx(-d.dtheta_c, abs=1e-12)
    assert d_neg.dL == pytest.approx(-d.dL, abs=1e-9)


def test_wedge_parallel_and_self():
    assert wedge(PlanarVec(1.0, 0.0), PlanarVec(1.0, 0.0)) == 0.0
    assert wedge(PlanarVec(0.4, -0.7), PlanarVec(0.4, -0.7)) == 0.0


def test_wedge_derived():
    assert wedge(PlanarVec(0.3, 0.17), PlanarVec(0.5, 0.2)) == pytest.approx(
        0.025, abs=1e-15
    )


@given(ax=finite, az=finite, bx=finite, bz=finite)
def test_wedge_antisymmetric(ax, az, bx, bz):
    a, b = PlanarVec(ax, az), PlanarVec(bx, bz)
    assert wedge(a, b) == pytest.approx(-wedge(b, a), abs=1e-9)


@given(ax=finite, az=finite, bx=finite, bz=finite, cx=finite, cz=finite,
       alpha=st.floats(-10, 10))
def test_wedge_bilinear(ax, az, bx, bz, cx, cz, alpha):
    a, b, c = PlanarVec(ax, az), PlanarVec(bx, bz), PlanarVec(cx, cz)
    lhs = wedge(a, PlanarVec(b.x + alpha * c.x, b.z + alpha * c.z))
    rhs = wedge(a, b) + alpha * wedge(a, c)
    assert lhs == pytest.approx(rhs, abs=1e-6 * (1 + abs(lhs)))


def test_impact_transfer_identity_cases():
    assert impact_transfer(6.0, PlanarVec(0.5, 0.2), PlanarVec(0.0, 0.0), P32) == 6.0
    assert impact_transfer(6.0, PlanarVec(0.0, 0.0), PlanarVec(0.3, 0.17), P32) == 6.0


def test_impact_transfer_derived():
    got = impact_transfer(6.0, PlanarVec(0.5, 0.2), PlanarVec(0.3, 0.17), P32)
    assert got == pytest.approx(6.0 - 32.0 * 0.025, rel=1e-12)


@given(L=finite, vx=finite, vz=finite)
def test_impact_transfer_zero_step_is_identity(L, vx, vz):
    assert impact_transfer(L, PlanarVec(vx, vz), PlanarVec(0.0, 0.0), P32) == L


def test_com_velocity_static():
    v = com_velocity_from_state(AlipState(0.0, 0.0), 1.0, 0.0, P32)
    assert v.x == 0.0 and v.z == 0.0


def test_com_velocity_pure_rotation():
    v = com_velocity_from_state(AlipState(0.0, 32.0), 1.0, 0.0, P32)
    assert v.x == pytest.approx(1.0, rel=1e-15)
    assert v.z == pytest.approx(0.0, abs=1e-15)


@given(
    theta=st.floats(-0.3, 0.3),
    L=st.floats(-50, 50),
    r=st.floats(0.5, 1.5),
    dr=st.floats(-2, 2),
)
def test_com_velocity_momentum_round_trip(theta, L, r, dr):
    # wedge(position, velocity) * m must reproduce L (transfer formula, L_c = 0)
    s = AlipState(theta, L)
    v = com_velocity_from_state(s, r, dr, P32)
    pos = PlanarVec(r * math.sin(theta), r * math.cos(theta))
    assert P32.m * wedge(pos, v) == pytest.approx(L, abs=1e-12 * (1 + abs(L)))


def test_state_rejects_non_finite():
    with pytest.raises(AlipDomainError):
        AlipState(float("nan"), 0.0)
    with pytest.raises(AlipDomainError):
        AlipState(0.0, float("inf"))
    with pytest.raises(AlipDomainError):
        PlanarVec(float("nan"), 0.0)
