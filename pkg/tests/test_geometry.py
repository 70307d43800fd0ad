import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lattice_addressing.geometry import (
    BeamSpec,
    Explicit,
    Gaussian,
    InfeasibleGeometryError,
    LatticeSpec,
    SiteRangeError,
    Uniform,
    amplitude_at,
    make_beams,
    normalize_site_phase,
    phase_at,
    site_phases,
    tilt_angle,
)


class TestSitePhases:
    def test_three_sites(self):
        assert site_phases(1) == [0.0, math.pi]

    def test_seven_sites(self):
        np.testing.assert_allclose(site_phases(3), [0, math.pi / 2, math.pi, -math.pi / 2], atol=1e-15)

    def test_single_atom(self):
        assert site_phases(0) == [0.0]

    def test_negative(self):
        with pytest.raises(ValueError):
            site_phases(-1)

    @pytest.mark.parametrize("N", range(0, 33))
    def test_range_and_raw_values(self, N):
        phases = site_phases(N)
        assert len(phases) == N + 1
        for j, vt in enumerate(phases, start=1):
            assert -math.pi < vt <= math.pi
            raw = 2 * math.pi * (j - 1) / (N + 1)
            assert abs(np.exp(1j * vt) - np.exp(1j * raw)) <= 1e-13

    @pytest.mark.parametrize("N", [1, 3, 5, 13, 31])
    def test_half_turn_exact(self, N):
        # the beam at phase pi must land exactly on pi, not on its rounded neighbour
        assert site_phases(N)[(N + 1) // 2] == math.pi

    @pytest.mark.parametrize("N", range(1, 33))
    def test_roots_of_unity(self, N):
        phases = np.array(site_phases(N))
        assert abs(np.exp(1j * phases).sum()) <= 1e-12


class TestNormalize:
    @pytest.mark.parametrize(
        "raw,expected", [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi / 2, -math.pi / 2)]
    )
    def test_values(self, raw, expected):
        assert normalize_site_phase(raw) == pytest.approx(expected, abs=1e-15)

    @given(st.floats(-50, 50, allow_nan=False))
    def test_idempotent(self, x):
        once = normalize_site_phase(x)
        assert normalize_site_phase(once) == pytest.approx(once, abs=1e-12)
        assert -math.pi < once <= math.pi


class TestTilt:
    def test_half_turn_unit_ratio(self):
        assert tilt_angle(math.pi, 1.0) == pytest.approx(math.pi / 2, abs=1e-15)

    def test_zero(self):
        assert tilt_angle(0.0, 3.0) == 0.0

    def test_quarter_half_ratio(self):
        # mpmath: asin(1/4)
        assert tilt_angle(math.pi / 2, 0.5) == pytest.approx(0.25268025514207865, abs=1e-15)

    def test_infeasible(self):
        with pytest.raises(InfeasibleGeometryError):
            tilt_angle(math.pi / 2, 2.5)

    def test_rounding_overshoot_clamped(self):
        assert tilt_angle(math.pi * (1 + 1e-15), 1.0) == pytest.approx(math.pi / 2)

    def test_bad_ratio(self):
        with pytest.raises(ValueError):
            tilt_angle(0.1, 0.0)


class TestMakeBeams:
    def test_reports_every_infeasible_beam(self):
        with pytest.raises(InfeasibleGeometryError) as info:
            make_beams(LatticeSpec(3, wavelength_ratio=2.5))
        assert [b[0] for b in info.value.beams] == [2, 3, 4]
        assert "beam 2" in str(info.value)

    def test_feasible_ratio_one_every_N(self):
        for N in range(0, 33):
            beams = make_beams(LatticeSpec(N))
            assert [b.index for b in beams] == list(range(1, N + 2))
            assert all(abs(math.sin(b.tilt)) <= 1 for b in beams)

    def test_profile_count(self):
        with pytest.raises(ValueError):
            make_beams(LatticeSpec(1), [Uniform()])

    def test_lattice_validation(self):
        for bad in [dict(half_width=-1), dict(half_width=1, wavelength_ratio=0), dict(half_width=1, dims=3)]:
            with pytest.raises(ValueError):
                LatticeSpec(**bad)


class TestPhaseAt:
    def test_target_is_base(self):
        beams = make_beams(LatticeSpec(3), base_phase=0.7)
        assert all(phase_at(b, 0) == pytest.approx(0.7) for b in beams)

    def test_half_turn_beam_neighbour(self):
        beam = make_beams(LatticeSpec(1))[1]
        assert phase_at(beam, 1) == pytest.approx(math.pi, abs=1e-15)

    def test_quarter_beam_far_site(self):
        beam = make_beams(LatticeSpec(3))[1]
        assert phase_at(beam, 3) == pytest.approx(3 * math.pi / 2, abs=1e-14)

    def test_out_of_range(self):
        beam = make_beams(LatticeSpec(1))[0]
        with pytest.raises(SiteRangeError):
            phase_at(beam, 2)

    @given(st.integers(1, 16), st.data())
    def test_telescoping(self, N, data):
        beams = make_beams(LatticeSpec(N), base_phase=0.3)
        b = beams[data.draw(st.integers(0, N))]
        m = data.draw(st.integers(-N, N - 1))
        diff = phase_at(b, m + 1) - phase_at(b, m)
        assert abs(np.exp(1j * diff) - np.exp(1j * b.site_phase)) <= 1e-12


class TestAmplitude:
    def test_uniform(self):
        b = make_beams(LatticeSpec(2), Uniform(2.0))[1]
        assert [amplitude_at(b, m) for m in range(-2, 3)] == [2.0] * 5

    def test_gaussian_neighbour(self):
        # untilted beam, waist 2: exp(-(1/2)^2) from mpmath
        b = make_beams(LatticeSpec(1), Gaussian(1.0, 2.0))[0]
        assert amplitude_at(b, 1) == pytest.approx(0.7788007830714049, abs=1e-15)
        assert amplitude_at(b, 0) == 1.0

    def test_explicit(self):
        prof = Explicit.symmetric(1.0, {1: 0.9})
        b = make_beams(LatticeSpec(1), prof)[1]
        assert amplitude_at(b, -1) == 0.9 and amplitude_at(b, 0) == 1.0

    def test_explicit_must_cover_sites(self):
        with pytest.raises(ValueError):
            make_beams(LatticeSpec(2), Explicit({0: 1.0, 1: 0.5, -1: 0.5}))

    @pytest.mark.parametrize("bad", [lambda: Uniform(-1), lambda: Gaussian(1, 0), lambda: Explicit({0: -0.1})])
    def test_negative_amplitudes(self, bad):
        with pytest.raises(ValueError):
            bad()

    def test_beamspec_normalizes(self):
        b = BeamSpec(1, 3 * math.pi / 2, 1)
        assert b.site_phase == pytest.approx(-math.pi / 2)
