"""Invariant suites run by ``lattice-addressing verify``.

Each suite returns a :class:`SuiteResult`; names are stable identifiers
used in reports and exit diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PulseParams, RotationSpec, commutator_check, compose, evolve_pulse, identity, make_rotation, max_abs_diff
from .geometry import LatticeSpec
from .interference import BeamSet, simulate_interference, total_rabi
from .mismatch import MismatchSpec, neighbor_fidelity_bound, neighbor_unitaries, simulated_neighbor_fidelity
from .protocol2d import Lattice2D, run_protocol
from .sequencer import PulseSchedule, synthesize, validate_groups, verify_bruteforce

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class SuiteResult:
    name: str
    ok: bool
    max_residual: float
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "ok", bool(self.ok))
        object.__setattr__(self, "max_residual", float(self.max_residual))


def cancellation_identity(max_N: int = 32, tol: float = 1e-12) -> SuiteResult:
    worst = 0.0
    for N in range(0, max_N + 1):
        beam_set = BeamSet.ideal(LatticeSpec(N))
        worst = max(worst, abs(total_rabi(beam_set, 0) - (N + 1)))
        for m in beam_set.lattice.sites:
            if m:
                worst = max(worst, abs(total_rabi(beam_set, m)))
    return SuiteResult("cancellation-identity", worst <= tol, worst, f"N=0..{max_N}")


def interference_ideal(rng, sizes=(1, 3, 7, 15), samples: int = 20, tol: float = DEFAULT_TOL) -> SuiteResult:
    worst = 0.0
    for N in sizes:
        beam_set = BeamSet.ideal(LatticeSpec(N))
        for _ in range(samples):
            rot = RotationSpec(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            sites = simulate_interference(beam_set, rot)
            for m, ev in sites.items():
                expected = make_rotation(rot) if m == 0 else identity(2)
                worst = max(worst, max_abs_diff(ev.unitary, expected))
    return SuiteResult("interference-ideal", worst <= tol, worst, f"N in {tuple(sizes)}, {samples} rotations each")


def sequence_groups(schedules) -> SuiteResult:
    bad = [s.sigma for s in schedules if not validate_groups(s).groups_ok]
    detail = f"{len(schedules)} schedules" + (f"; failing sigma {bad}" if bad else "")
    return SuiteResult("sequence-groups", not bad, 0.0 if not bad else 1.0, detail)


def sequence_bruteforce(schedules, rng, areas: int = 20, tol: float = DEFAULT_TOL) -> SuiteResult:
    worst = 0.0
    bad = []
    for s in schedules:
        lattice = LatticeSpec(s.half_width)
        for a in rng.uniform(0, math.pi, areas):
            rep = verify_bruteforce(s.with_area(float(a)), lattice, tol)
            worst = max(worst, rep.max_residual)
            if not rep.bruteforce_ok:
                bad.append(s.sigma)
                break
    detail = f"{len(schedules)} schedules x {areas} areas" + (f"; failing sigma {bad}" if bad else "")
    return SuiteResult("sequence-bruteforce", not bad, worst, detail)


def scheme_equivalence(n_r: int = 51, tol: float = 1e-12) -> SuiteResult:
    worst = 0.0
    for r in np.linspace(0.5, 1.2, n_r):
        mm = MismatchSpec(float(r))
        ui = neighbor_unitaries(mm, "interference")
        us = neighbor_unitaries(mm, "sequential")
        worst = max(worst, *(max_abs_diff(ui[m], us[m]) for m in ui))
    return SuiteResult("scheme-equivalence", worst <= tol, worst, f"{n_r} ratios in [0.5, 1.2]")


def fidelity_anchors(tol: float = 1e-9) -> SuiteResult:
    f90 = simulated_neighbor_fidelity(MismatchSpec(0.9), "interference")
    f96 = simulated_neighbor_fidelity(MismatchSpec(0.96), "interference")
    worst = 0.0
    for r in np.linspace(0.5, 1.0, 51):
        for scheme in ("interference", "sequential"):
            f = simulated_neighbor_fidelity(MismatchSpec(float(r)), scheme)
            worst = max(worst, abs(f - neighbor_fidelity_bound(float(r))))
    ok = bool(f90 >= 0.99) and abs(f90 - 0.99385) <= 1e-4 and 1 - f96 <= 1e-3 and worst <= tol
    return SuiteResult("fidelity-anchors", ok, worst, f"F(0.9)={f90:.6f}, F(0.96)={f96:.6f}")


def commutator(rng, samples: int = 1000, tol: float = 1e-12) -> SuiteResult:
    worst = 0.0
    for _ in range(samples):
        a = rng.uniform(0, math.pi)
        closed, direct = commutator_check(
            PulseParams(a, rng.uniform(0, 2 * math.pi)), PulseParams(a, rng.uniform(0, 2 * math.pi))
        )
        worst = max(worst, max_abs_diff(closed, direct))
    return SuiteResult("commutator", worst <= tol, worst, f"{samples} equal-area samples")


def area_additivity(rng, samples: int = 100, pieces: int = 10, tol: float = 1e-12) -> SuiteResult:
    worst = 0.0
    for _ in range(samples):
        a, phi = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        w = rng.uniform(0.1, 1.0, pieces)
        parts = a * w / w.sum()
        split = compose(evolve_pulse(PulseParams(float(x), phi)) for x in parts)
        worst = max(worst, max_abs_diff(split, evolve_pulse(PulseParams(a, phi))))
    return SuiteResult("area-additivity", worst <= tol, worst, f"{samples} pulses split in {pieces}")


def protocol_roundtrip(rng, sizes=(1, 3), tol: float = DEFAULT_TOL) -> SuiteResult:
    worst, leak = 0.0, 0.0
    for N in sizes:
        for scheme in ("interference", "sequential"):
            rot = RotationSpec(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            res = run_protocol(Lattice2D.random(N, rng), rot, scheme)
            worst = max(worst, res.target_error, res.max_residual)
            leak = max(leak, res.max_leakage)
    ok = worst <= tol and leak <= 1e-20
    return SuiteResult("protocol-2d-roundtrip", ok, worst, f"patches N in {tuple(sizes)}, max leakage {leak:.3e}")


def scenario_lattice(N: int, rng, samples: int = 5, tol: float = DEFAULT_TOL) -> SuiteResult:
    """Ideal interference on a user-chosen chain, including the single-atom case ``N = 0``."""
    beam_set = BeamSet.ideal(LatticeSpec(N))
    worst = 0.0
    for _ in range(samples):
        rot = RotationSpec(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        for m, ev in simulate_interference(beam_set, rot).items():
            expected = make_rotation(rot) if m == 0 else identity(2)
            worst = max(worst, max_abs_diff(ev.unitary, expected))
    return SuiteResult("scenario-lattice", worst <= tol, worst, f"interference on N={N}")


def run_all(
    schedule: PulseSchedule | None = None,
    half_width: int | None = None,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> list[SuiteResult]:
    """Run every suite. ``schedule`` adds a fixture to the sequence suites."""
    rng = np.random.default_rng(seed)
    schedules = [synthesize(L) for L in range(1, 6)]
    if schedule is not None:
        schedules.append(schedule)
    results = [
        cancellation_identity(),
        interference_ideal(rng, tol=tol),
        sequence_groups(schedules),
        sequence_bruteforce(schedules, rng, tol=tol),
        scheme_equivalence(),
        fidelity_anchors(),
        commutator(rng),
        area_additivity(rng),
        protocol_roundtrip(rng, tol=tol),
    ]
    if half_width is not None:
        results.append(scenario_lattice(half_width, rng, tol=tol))
    return results
