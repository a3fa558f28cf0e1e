import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouvopt.errors import DomainError
from liouvopt.interfaces import (
    FULL_TRANSMISSION,
    InterfaceCoeffs,
    beta_1d,
    coeffs_1d,
    coeffs_2d,
    full_transmission,
    hat,
    step_gates_2d,
    transmit_test_2d,
    transmitted_xi_1d,
)


def test_coeffs_1d_printed_pairs():
    c = coeffs_1d(0.6, 0.2)
    assert (c.alpha_R, c.alpha_T) == (0.25, 0.75)
    c = coeffs_1d(1.0, 0.6)
    assert (c.alpha_R, c.alpha_T) == (0.0625, 0.9375)


def test_coeffs_1d_no_jump_means_no_reflection():
    c = coeffs_1d(0.7, 0.7)
    assert c.alpha_R == 0.0 and c.alpha_T == 1.0


def test_coeffs_1d_side_symmetry():
    assert coeffs_1d(0.6, 0.2) == coeffs_1d(0.2, 0.6)


@given(st.floats(0.01, 100.0), st.floats(0.01, 100.0))
def test_coeffs_1d_probability_split(a, b):
    c = coeffs_1d(a, b)
    assert 0.0 <= c.alpha_R < 1.0
    assert c.alpha_R + c.alpha_T == 1.0


def test_coeffs_validation():
    with pytest.raises(DomainError):
        coeffs_1d(-1.0, 1.0)
    with pytest.raises(DomainError):
        InterfaceCoeffs(1.5, -0.5)


def test_full_transmission_rule():
    assert full_transmission(0.6, 0.2) is FULL_TRANSMISSION
    assert FULL_TRANSMISSION.alpha_T == 1.0


def test_coeffs_2d_normal_incidence_reduces_to_1d():
    c = coeffs_2d(0.6, 0.2, 1.0, 1.0)
    assert (c.alpha_R, c.alpha_T) == (0.25, 0.75)


def test_coeffs_2d_label_swap_symmetry():
    a = coeffs_2d(1.0, 2.0, 0.8, 0.3)
    b = coeffs_2d(2.0, 1.0, 0.3, 0.8)
    assert a.alpha_R == b.alpha_R  # the squared ratio only flips sign


def test_coeffs_2d_rejects_bad_cosines():
    with pytest.raises(DomainError):
        coeffs_2d(1.0, 2.0, 0.0, 0.5)
    with pytest.raises(DomainError):
        coeffs_2d(1.0, 2.0, 0.5, 1.5)


def test_transmitted_xi_preserves_hamiltonian():
    xi = -0.7
    out = transmitted_xi_1d(xi, 0.6, 0.2)
    assert 0.6 * abs(xi) == pytest.approx(0.2 * abs(out), rel=1e-15)
    assert out < 0  # direction of travel is kept


def test_transmit_test_2d_equal_speeds_is_identity():
    d = transmit_test_2d(0.4, -0.3, 1.0, 1.0)
    assert not d.total_reflection
    assert d.transmitted == pytest.approx(0.4, rel=1e-15)


def test_transmit_test_2d_preserves_speed_times_modulus():
    xi, eta = 0.5, 0.2
    c_from, c_to = 2.0, 1.0
    d = transmit_test_2d(xi, eta, c_from, c_to)
    assert d.discriminant > 0
    before = c_from * math.hypot(xi, eta)
    after = c_to * math.hypot(d.transmitted, eta)
    assert before == pytest.approx(after, rel=1e-14)
    assert math.copysign(1, d.transmitted) == math.copysign(1, xi)


def test_transmit_test_2d_total_reflection():
    # slow-to-fast crossing at shallow incidence has no real transmitted root
    d = transmit_test_2d(0.1, 1.0, 1.0, 2.0)
    assert d.discriminant <= 0
    assert d.total_reflection
    assert d.transmitted is None
    assert d.branch == "total-reflection"


def test_transmit_test_2d_rejects_grazing():
    with pytest.raises(DomainError):
        transmit_test_2d(0.0, 1.0, 1.0, 2.0)


def test_hat_partition_of_unity():
    d = 0.25
    for z in (0.0, 0.1, -0.24, 0.2):
        total = sum(hat(z - k * d, d) for k in range(-3, 4))
        assert total == pytest.approx(1.0, rel=1e-14)
    assert hat(0.0, d) == 1.0
    assert hat(d, d) == 0.0
    with pytest.raises(DomainError):
        hat(0.0, 0.0)


def test_beta_weight_identity_for_equal_speeds():
    # no jump: the weight picks out exactly the matching slowness node
    assert beta_1d(1.0, 1.0, 0.5, 0.5, 0.25) == 1.0
    assert beta_1d(1.0, 1.0, 0.5, 0.75, 0.25) == 0.0


def test_beta_weight_uses_the_upwind_side():
    # rightward wave (xi > 0) came from the left medium: source = (c+/c-) xi
    w = beta_1d(1.0, 2.0, 0.5, 1.0, 0.25)
    assert w == 1.0
    # leftward wave maps with the reciprocal ratio
    w = beta_1d(1.0, 2.0, -0.5, -0.25, 0.25)
    assert w == 1.0


def test_step_gates_partition():
    c = coeffs_1d(0.6, 0.2)
    a_t, a_r = step_gates_2d(1.0, c)
    assert (a_t, a_r) == (c.alpha_T, c.alpha_R)
    a_t, a_r = step_gates_2d(-0.5, c)
    assert (a_t, a_r) == (0.0, 1.0)
    a_t, a_r = step_gates_2d(0.0, c)
    assert a_t + a_r == 1.0
