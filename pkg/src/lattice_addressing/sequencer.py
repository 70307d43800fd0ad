"""Sequential scheme: the ``N+1 = 2^L`` beams are applied one after another.

A schedule is a permutation ``sigma`` with ``sigma[k-1]`` the beam used in
step ``k``. Because consecutive pulses generally do not commute, only some
orders leave the non-target sites untouched. The order produced here is the
bit-reversal permutation; :func:`validate_groups` checks the hierarchical
pairing condition and :func:`verify_bruteforce` multiplies the actual
per-site unitaries as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .core import QUBIT, TWO_PI, PulseParams, RotationSpec, compose, evolve_pulse, identity, max_abs_diff
from .geometry import LatticeSpec, amplitude_at, phase_at, phase_step, site_phases, tilt_angle
from .interference import BeamSet, DegenerateTargetError, SiteEvolution, initial_states

BRUTEFORCE_TOL = 1e-10


class ScheduleError(ValueError):
    """Malformed schedule, or schedule incompatible with the lattice."""


def log2_exact(n: int) -> int:
    """``L`` with ``2**L == n``; raise :class:`ScheduleError` when ``n`` is not a power of two."""
    if n < 2 or n & (n - 1):
        raise ScheduleError(f"N+1 = {n} is not a power of two 2^L with L >= 1")
    return n.bit_length() - 1


def bit_reverse(x: int, bits: int) -> int:
    out = 0
    for _ in range(bits):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


@dataclass(frozen=True)
class PulseSchedule:
    L: int
    sigma: tuple[int, ...]
    per_pulse_area: float = math.pi / 8

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ScheduleError(f"L must be a positive integer, got {self.L}")
        sigma = tuple(int(j) for j in self.sigma)
        object.__setattr__(self, "sigma", sigma)
        n = 2**self.L
        if sorted(sigma) != list(range(1, n + 1)):
            raise ScheduleError(f"sigma must be a permutation of 1..{n}, got {sigma}")
        if not (math.isfinite(self.per_pulse_area) and self.per_pulse_area >= 0):
            raise ScheduleError("per-pulse area must be finite and non-negative")

    @classmethod
    def from_sigma(cls, sigma: Sequence[int], per_pulse_area: float = math.pi / 8) -> "PulseSchedule":
        return cls(log2_exact(len(sigma)), tuple(sigma), per_pulse_area)

    @property
    def n_pulses(self) -> int:
        return 2**self.L

    @property
    def half_width(self) -> int:
        return self.n_pulses - 1

    def with_area(self, per_pulse_area: float) -> "PulseSchedule":
        return replace(self, per_pulse_area=per_pulse_area)

    def phase_index(self, k: int, m: int) -> int:
        """Phase of step ``k`` (1-based) at site ``m`` in units of ``2*pi / 2^L``."""
        n = self.n_pulses
        return (m * phase_step(self.sigma[k - 1], n)) % n

    def phase_table(self, sites: Sequence[int]) -> np.ndarray:
        """``table[i, k-1]`` = phase of step ``k`` at ``sites[i]`` relative to the target, in ``[0, 2*pi)``."""
        n = self.n_pulses
        return np.array(
            [[TWO_PI * self.phase_index(k, m) / n for k in range(1, n + 1)] for m in sites]
        )


@dataclass(frozen=True)
class ValidationReport:
    group_levels: tuple[bool, ...] = ()
    bruteforce_ok: bool | None = None
    max_residual: float | None = None
    residuals: Mapping[int, float] | None = None

    @property
    def groups_ok(self) -> bool:
        return bool(self.group_levels) and all(self.group_levels)

    @property
    def ok(self) -> bool:
        parts = []
        if self.group_levels:
            parts.append(self.groups_ok)
        if self.bruteforce_ok is not None:
            parts.append(self.bruteforce_ok)
        return bool(parts) and all(parts)

    def merged(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(
            self.group_levels or other.group_levels,
            self.bruteforce_ok if self.bruteforce_ok is not None else other.bruteforce_ok,
            self.max_residual if self.max_residual is not None else other.max_residual,
            self.residuals if self.residuals is not None else other.residuals,
        )


def validate_groups(schedule: PulseSchedule) -> ValidationReport:
    """Check the hierarchical pairing condition at every level ``s = 1..L``.

    At level ``s`` the site ``m = 2^(L-s)`` is inspected. The steps split into
    ``2^s`` consecutive groups of ``2^(L-s)`` pulses; each group must carry a
    single phase, and each odd-numbered group must be followed by one whose
    phase differs by exactly ``pi``. Phases are compared as exact integers
    modulo ``2^L``.
    """
    L, n = schedule.L, schedule.n_pulses
    levels = []
    for s in range(1, L + 1):
        m = 2 ** (L - s)
        size = m
        phases = [schedule.phase_index(k, m) for k in range(1, n + 1)]
        groups = [phases[i : i + size] for i in range(0, n, size)]
        ok = all(len(set(g)) == 1 for g in groups)
        if ok:
            ok = all((groups[g + 1][0] - groups[g][0]) % n == n // 2 for g in range(0, len(groups), 2))
        levels.append(ok)
    return ValidationReport(group_levels=tuple(levels))


def synthesize(L: int, per_pulse_area: float = math.pi / 8) -> PulseSchedule:
    """Bit-reversal ordering: step ``k`` uses beam ``1 + rev_L(k - 1)``."""
    if int(L) != L or L < 1:
        raise ScheduleError(f"L must be a positive integer, got {L}")
    n = 2**L
    schedule = PulseSchedule(L, tuple(1 + bit_reverse(k, L) for k in range(n)), per_pulse_area)
    if not validate_groups(schedule).groups_ok:  # pragma: no cover - construction invariant
        raise AssertionError(f"bit-reversal schedule failed validation for L={L}")
    return schedule


def _check_sizes(schedule: PulseSchedule, half_width: int) -> None:
    if half_width + 1 != schedule.n_pulses:
        raise ScheduleError(
            f"schedule has {schedule.n_pulses} pulses but the lattice needs N+1 = {half_width + 1}"
        )


def verify_bruteforce(
    schedule: PulseSchedule, lattice: LatticeSpec, tol: float = BRUTEFORCE_TOL
) -> ValidationReport:
    """Multiply the per-site pulse unitaries in step order for every site.

    Non-target sites must end at the identity; the target must end at a
    single pulse of area ``2^L * per_pulse_area``. Uses uniform amplitudes and
    zero base phase.
    """
    _check_sizes(schedule, lattice.half_width)
    a = schedule.per_pulse_area
    thetas = site_phases(lattice.half_width)
    residuals = {}
    for m in lattice.sites:
        u = compose(evolve_pulse(PulseParams(a, m * thetas[j - 1])) for j in schedule.sigma)
        expected = identity(2) if m else evolve_pulse(PulseParams(a * schedule.n_pulses, 0.0))
        residuals[m] = max_abs_diff(u, expected)
    worst = max(residuals.values())
    return ValidationReport(bruteforce_ok=worst <= tol, max_residual=worst, residuals=residuals)


def validate(schedule: PulseSchedule, lattice: LatticeSpec | None = None, tol: float = BRUTEFORCE_TOL) -> ValidationReport:
    if lattice is None:
        lattice = LatticeSpec(schedule.half_width)
    return validate_groups(schedule).merged(verify_bruteforce(schedule, lattice, tol))


def sequence_pulses(
    schedule: PulseSchedule, beam_set: BeamSet, rotation: RotationSpec
) -> dict[int, list[PulseParams]]:
    """Per-site pulse lists, in step order, for one run of the schedule.

    All steps share one duration, chosen so the target accumulates
    ``rotation.xi``; a beam's area at site ``m`` scales with its amplitude
    ``Omega_j(m)``. Phases are taken relative to each beam's base phase and
    offset by ``rotation.phi``.
    """
    _check_sizes(schedule, beam_set.lattice.half_width)
    target_amp = sum(amplitude_at(beam_set.beam(j), 0) for j in schedule.sigma)
    if target_amp == 0.0:
        raise DegenerateTargetError("target site sees zero Rabi frequency in every step")
    unit = rotation.xi / target_amp
    out = {}
    for m in beam_set.lattice.sites:
        steps = []
        for j in schedule.sigma:
            b = beam_set.beam(j)
            steps.append(PulseParams(unit * amplitude_at(b, m), phase_at(b, m) - b.base_phase + rotation.phi))
        out[m] = steps
    return out


def simulate_sequence(
    schedule: PulseSchedule,
    lattice: LatticeSpec,
    target_rotation: RotationSpec,
    initial: Mapping[int, np.ndarray] | None = None,
    profiles=None,
) -> dict[int, SiteEvolution]:
    """Run the schedule on a 1D chain and return ``{m: SiteEvolution}``.

    ``profiles`` is passed to :func:`BeamSet.ideal` (one shared profile or one
    per beam). With uniform profiles the per-pulse area is ``xi / 2^L``.
    """
    beam_set = BeamSet.ideal(lattice, profiles)
    pulses = sequence_pulses(schedule, beam_set, target_rotation)
    states = initial_states(lattice.sites, initial)
    out = {}
    for m, steps in pulses.items():
        u = compose(evolve_pulse(p, QUBIT) for p in steps)
        out[m] = SiteEvolution(m, u, u @ states[m])
    return out


def schedule_records(schedule: PulseSchedule, wavelength_ratio: float = 1.0) -> list[dict]:
    """One record per step: beam, site phase, tilt, area and the per-site phase row."""
    N = schedule.half_width
    thetas = site_phases(N)
    sites = list(range(-N, N + 1))
    table = schedule.phase_table(sites)
    records = []
    for k, j in enumerate(schedule.sigma, start=1):
        vt = thetas[j - 1]
        records.append(
            {
                "k": k,
                "beam": j,
                "site_phase": vt,
                "tilt": tilt_angle(vt, wavelength_ratio),
                "area": schedule.per_pulse_area,
                "phases": {m: float(table[i, k - 1]) for i, m in enumerate(sites)},
            }
        )
    return records
