import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_addressing.core import (
    PulseParams,
    RotationSpec,
    TransitionError,
    as_state,
    as_unitary,
    basis_state,
    commutator_check,
    compose,
    evolve_pulse,
    identity,
    make_rotation,
    max_abs_diff,
    state_fidelity,
    unitarity_error,
    worst_case_fidelity,
    worst_case_fidelity_grid,
    worst_case_overlap,
)

angles = st.floats(0.0, 2 * math.pi, allow_nan=False)
areas = st.floats(0.0, math.pi, allow_nan=False)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def explicit_pulse(area, phi):
    # independent construction: exp(-i a (cos(phi) X - sin(phi) Y)) in closed form
    n_sigma = math.cos(phi) * X - math.sin(phi) * Y
    return math.cos(area) * np.eye(2) - 1j * math.sin(area) * n_sigma


class TestRotation:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(make_rotation(RotationSpec(0.0, 1.234)), np.eye(2), atol=1e-15)

    def test_half_pi_is_flip(self):
        np.testing.assert_allclose(make_rotation(RotationSpec(math.pi / 2)), [[0, -1j], [-1j, 0]], atol=1e-15)

    def test_quarter_pi_phase_half_pi(self):
        # values from a 40-digit mpmath evaluation of the rotation formula
        expected = [[0.7071067811865476, 0.7071067811865476], [-0.7071067811865476, 0.7071067811865476]]
        np.testing.assert_allclose(make_rotation(RotationSpec(math.pi / 4, math.pi / 2)), expected, atol=1e-15)

    @pytest.mark.parametrize("xi,phi", [(-0.3, 0.2), (4.0, 1.0), (7.5, -2.0), (math.pi, 0.5)])
    def test_normalization_preserves_operator(self, xi, phi):
        spec = RotationSpec(xi, phi)
        assert 0 <= spec.xi <= math.pi and 0 <= spec.phi < 2 * math.pi
        np.testing.assert_allclose(make_rotation(spec), explicit_pulse(xi, phi), atol=1e-13)

    @given(areas, angles)
    def test_rotation_equals_pulse(self, xi, phi):
        u = make_rotation(RotationSpec(xi, phi))
        v = evolve_pulse(PulseParams(xi, phi))
        assert max_abs_diff(u, v) <= 1e-12
        assert unitarity_error(u) <= 1e-12


class TestEvolvePulse:
    def test_zero_area(self):
        np.testing.assert_array_equal(evolve_pulse(PulseParams(0.0, 2.0)), np.eye(2))

    def test_flip(self):
        np.testing.assert_allclose(evolve_pulse(PulseParams(math.pi / 2)), -1j * X, atol=1e-15)

    def test_matches_independent_construction(self):
        for a, phi in [(0.3, 0.0), (1.1, 2.5), (2.9, 5.5)]:
            np.testing.assert_allclose(evolve_pulse(PulseParams(a, phi)), explicit_pulse(a, phi), atol=1e-15)

    def test_four_level_embedding(self):
        u = evolve_pulse(PulseParams(0.7, 0.4), (2, 3), dim=4)
        np.testing.assert_allclose(u[:2, :2], np.eye(2))
        np.testing.assert_allclose(u[2:, 2:], evolve_pulse(PulseParams(0.7, 0.4)), atol=1e-15)
        assert not np.any(u[:2, 2:]) and not np.any(u[2:, :2])

    @pytest.mark.parametrize("transition", [(0, 0), (0, 2), (-1, 1), (1,), "ab"])
    def test_bad_transition(self, transition):
        with pytest.raises(TransitionError):
            evolve_pulse(PulseParams(0.1), transition)

    def test_negative_area_rejected(self):
        with pytest.raises(ValueError):
            PulseParams(-0.1)

    def test_cancellation_pair_grid(self):
        worst = 0.0
        for a in np.linspace(0, math.pi, 100):
            for phi in np.linspace(0, 2 * math.pi, 100):
                u = evolve_pulse(PulseParams(a, phi + math.pi)) @ evolve_pulse(PulseParams(a, phi))
                worst = max(worst, max_abs_diff(u, np.eye(2)))
        assert worst <= 1e-12

    @given(areas, angles)
    def test_addition_pair(self, a, phi):
        u = evolve_pulse(PulseParams(a, phi))
        assert max_abs_diff(u @ u, evolve_pulse(PulseParams(2 * a, phi))) <= 1e-12


class TestCompose:
    def test_empty(self):
        np.testing.assert_array_equal(compose([]), np.eye(2))
        np.testing.assert_array_equal(compose([], dim=4), np.eye(4))

    def test_inverse_pair(self):
        u = evolve_pulse(PulseParams(0.9, 1.3))
        assert max_abs_diff(compose([u, u.conj().T]), np.eye(2)) <= 1e-12

    def test_order_first_applied_is_rightmost(self):
        a, b = evolve_pulse(PulseParams(0.4, 0.0)), evolve_pulse(PulseParams(0.7, 1.0))
        np.testing.assert_allclose(compose([a, b]), b @ a)

    def test_equal_phase_pulses_square(self):
        u = evolve_pulse(PulseParams(0.6, 2.2))
        np.testing.assert_allclose(compose([u, u]), u @ u)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            compose([identity(2), identity(4)])

    @given(st.lists(st.tuples(areas, angles), max_size=32))
    @settings(max_examples=50)
    def test_unitarity_closure(self, pulses):
        u = compose(evolve_pulse(PulseParams(a, p)) for a, p in pulses)
        assert unitarity_error(u) <= 1e-12


class TestCommutator:
    @given(areas, st.floats(math.pi, 2 * math.pi, exclude_max=True), st.booleans())
    def test_zero_cases(self, a, phi2, half_turn):
        phi1 = phi2 - math.pi  # exact, so the two phases differ by exactly pi
        closed, direct = commutator_check(PulseParams(a, phi1), PulseParams(a, phi2 if half_turn else phi1))
        assert np.max(np.abs(closed)) <= 1e-15
        assert np.max(np.abs(direct)) <= 1e-15

    def test_quarter_turn(self):
        # oracle: U1 = -iX, U2 = -i(iY)... multiply the explicit Pauli forms by hand
        u1 = -1j * X
        u2 = -1j * (1j * 1 * np.array([[0, 1], [0, 0]]) + (-1j) * np.array([[0, 0], [1, 0]]))
        oracle = u2 @ u1 - u1 @ u2
        np.testing.assert_allclose(oracle, -2j * Z, atol=1e-15)
        closed, direct = commutator_check(PulseParams(math.pi / 2, 0.0), PulseParams(math.pi / 2, math.pi / 2))
        np.testing.assert_allclose(closed, -2j * Z, atol=1e-15)
        np.testing.assert_allclose(direct, oracle, atol=1e-15)

    def test_random_agreement(self, rng):
        for _ in range(1000):
            a = rng.uniform(0, math.pi)
            closed, direct = commutator_check(
                PulseParams(a, rng.uniform(0, 2 * math.pi)), PulseParams(a, rng.uniform(0, 2 * math.pi))
            )
            assert max_abs_diff(closed, direct) <= 1e-12

    def test_unequal_areas(self):
        closed, direct = commutator_check(PulseParams(0.3, 0.0), PulseParams(0.5, 1.0))
        assert closed is None
        assert direct.shape == (2, 2)


class TestFidelity:
    def test_identity(self, rng):
        for _ in range(20):
            q = rng.normal(size=2) + 1j * rng.normal(size=2)
            assert state_fidelity(q / np.linalg.norm(q), np.eye(2)) == pytest.approx(1.0, abs=1e-15)

    def test_flip_of_ground(self):
        assert state_fidelity(basis_state(0), make_rotation(RotationSpec(math.pi / 2))) == pytest.approx(0.0, abs=1e-30)

    def test_small_x_rotation(self):
        # direct evaluation: <0|U|0> = cos(pi/8)
        assert state_fidelity(basis_state(0), make_rotation(RotationSpec(math.pi / 8))) == pytest.approx(
            0.85355339059327376, abs=1e-15
        )

    def test_worst_case_identity(self):
        assert worst_case_fidelity(np.eye(2)) == 1.0

    def test_worst_case_quarter(self):
        u = evolve_pulse(PulseParams(math.pi / 4))
        assert worst_case_fidelity_grid(u, 101, 100) == pytest.approx(0.5, abs=1e-12)
        assert worst_case_fidelity(u) == pytest.approx(0.5, abs=1e-12)

    def test_worst_case_mismatch_residual(self):
        u = evolve_pulse(PulseParams(0.1 * math.pi / 4, 0.0))
        grid = worst_case_fidelity_grid(u, 101, 100)
        assert grid == pytest.approx(0.99384417029756886, abs=1e-12)
        assert worst_case_fidelity(u) == pytest.approx(grid, abs=1e-9)

    @given(areas, angles)
    @settings(max_examples=40)
    def test_analytic_equals_grid(self, a, phi):
        u = evolve_pulse(PulseParams(a, phi))
        assert abs(worst_case_fidelity(u) - math.cos(a) ** 2) <= 1e-12
        assert abs(worst_case_fidelity(u) - worst_case_fidelity_grid(u)) <= 1e-9

    def test_general_unitary_bounded_by_grid(self, rng):
        # arbitrary axis: grid minimum can only sit above the true minimum
        for _ in range(10):
            h = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            q, _ = np.linalg.qr(h)
            assert worst_case_fidelity(q) <= worst_case_fidelity_grid(q) + 1e-12
            assert worst_case_fidelity_grid(q, 201, 200) - worst_case_fidelity(q) < 1e-3

    def test_overlap_is_sqrt_fidelity(self):
        u = evolve_pulse(PulseParams(0.3, 0.1))
        assert worst_case_overlap(u) ** 2 == pytest.approx(worst_case_fidelity(u))


class TestCheckedConstructors:
    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            as_unitary([[1, 1], [0, 1]])

    def test_rejects_bad_dim(self):
        with pytest.raises(ValueError):
            as_unitary(np.eye(3))

    def test_state_norm(self):
        with pytest.raises(ValueError):
            as_state([1, 1])
        psi = as_state([1, 0, 0, 0])
        assert not psi.flags.writeable

    def test_results_are_read_only(self):
        u = evolve_pulse(PulseParams(0.5))
        with pytest.raises(ValueError):
            u[0, 0] = 2
