import math

import numpy as np
import pytest

from lattice_addressing.core import RotationSpec, basis_state, max_abs_diff
from lattice_addressing.protocol2d import (
    HIDE,
    ROTATE_PRIMED,
    BeamSet2D,
    Lattice2D,
    apply_beamset_2d,
    hide_pulse_unitary,
    run_protocol,
)
from lattice_addressing.sequencer import ScheduleError

PI = math.pi


class TestHidePulse:
    def test_zero(self):
        np.testing.assert_array_equal(hide_pulse_unitary(0.0), np.eye(4))

    def test_swap(self):
        u = hide_pulse_unitary(PI / 2)
        np.testing.assert_allclose(u @ basis_state(0, 4), [0, 0, -1j, 0], atol=1e-15)
        np.testing.assert_allclose(u @ basis_state(1, 4), [0, 0, 0, -1j], atol=1e-15)

    def test_inverse(self):
        for a in (PI / 2, 0.4, 2.2):
            u = hide_pulse_unitary(a, PI) @ hide_pulse_unitary(a, 0.0)
            assert max_abs_diff(u, np.eye(4)) <= 1e-15


class TestLattice2D:
    def test_default_states(self):
        lat = Lattice2D(1)
        assert len(lat.sites) == 9
        assert all(np.array_equal(v, basis_state(0, 4)) for v in lat.states.values())

    def test_incomplete(self):
        with pytest.raises(ValueError):
            Lattice2D(1, {(0, 0): basis_state(0, 4)})

    def test_unnormalized(self, rng):
        lat = Lattice2D.random(1, rng)
        states = dict(lat.states)
        states[(0, 0)] = np.array([1, 1, 0, 0])
        with pytest.raises(ValueError):
            Lattice2D(1, states)

    def test_primed_population_rejected(self):
        lat = Lattice2D(0, {(0, 0): basis_state(2, 4)})
        with pytest.raises(ValueError):
            run_protocol(lat, RotationSpec(0.3))


class TestBeamSet2D:
    def test_bad_axis(self):
        with pytest.raises(ValueError):
            BeamSet2D.ideal(1, "z", HIDE)

    def test_bad_transition(self):
        with pytest.raises(ValueError):
            BeamSet2D.ideal(1, "x", "swap")

    def test_hide_step_reaches_row_only(self):
        lat = Lattice2D(1)
        us = apply_beamset_2d(lat, BeamSet2D.ideal(1, "y", HIDE), "interference", PI / 2)
        for (mx, my), u in us.items():
            if my == 0:
                assert max_abs_diff(u, hide_pulse_unitary(PI / 2)) <= 1e-12
            else:
                assert max_abs_diff(u, np.eye(4)) <= 1e-12

    def test_rotate_step_touches_primed_only(self):
        lat = Lattice2D(1)
        us = apply_beamset_2d(lat, BeamSet2D.ideal(1, "x", ROTATE_PRIMED), "sequential", 0.8, 0.3)
        u = us[(0, 1)]
        np.testing.assert_allclose(u[:2, :2], np.eye(2), atol=1e-15)
        assert max_abs_diff(us[(1, 0)], np.eye(4)) <= 1e-12

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            apply_beamset_2d(Lattice2D(1), BeamSet2D.ideal(3, "x", HIDE), "interference", 0.1)


class TestProtocol:
    @pytest.mark.parametrize("N", [1, 3])
    @pytest.mark.parametrize("scheme", ["interference", "sequential"])
    def test_random_patches(self, N, scheme, rng):
        for _ in range(3):
            rot = RotationSpec(rng.uniform(0, PI), rng.uniform(0, 2 * PI))
            res = run_protocol(Lattice2D.random(N, rng), rot, scheme)
            assert res.target_error <= 1e-10
            assert res.max_residual <= 1e-10
            assert res.max_leakage <= 1e-20
            assert res.min_fidelity >= 1 - 1e-12

    def test_mixed_schemes(self, rng):
        res = run_protocol(Lattice2D.random(1, rng), RotationSpec(1.0, 2.0), ("sequential", "interference", "sequential"))
        assert res.target_error <= 1e-10 and res.max_residual <= 1e-10

    def test_flip_target(self):
        res = run_protocol(Lattice2D(1), RotationSpec(PI / 2))
        np.testing.assert_allclose(np.abs(res.final_states[(0, 0)]), [0, 1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(np.abs(res.final_states[(1, 0)]), [1, 0, 0, 0], atol=1e-15)

    def test_sequential_needs_power_of_two(self, rng):
        with pytest.raises(ScheduleError):
            run_protocol(Lattice2D.random(2, rng), RotationSpec(0.3), "sequential")

    def test_interference_any_N(self, rng):
        res = run_protocol(Lattice2D.random(2, rng), RotationSpec(0.3, 0.1), "interference")
        assert res.target_error <= 1e-10 and res.max_residual <= 1e-10

    def test_single_atom(self):
        res = run_protocol(Lattice2D(0), RotationSpec(0.5, 0.5))
        assert len(res.records) == 1 and res.target_error <= 1e-12

    def test_step_count(self):
        with pytest.raises(ValueError):
            run_protocol(Lattice2D(1), RotationSpec(0.3), ("interference", "sequential"))
