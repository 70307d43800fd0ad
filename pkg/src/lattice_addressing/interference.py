"""Simultaneous-beam scheme: all ``N+1`` beams drive the chain at once.

The beams add coherently at every site. With site phases on the
``(N+1)``-th roots of unity the field cancels on every site but the
target, which sees ``N+1`` times the single-beam Rabi frequency.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import QUBIT, PulseParams, RotationSpec, basis_state, evolve_pulse, wrap_phase
from .geometry import BeamSpec, LatticeSpec, SiteRangeError, amplitude_at, make_beams, phase_at


class DegenerateTargetError(ValueError):
    """The target site sees no field, so no rotation can be driven."""


@dataclass(frozen=True)
class BeamSet:
    lattice: LatticeSpec
    beams: tuple[BeamSpec, ...]

    def __post_init__(self):
        beams = tuple(self.beams)
        object.__setattr__(self, "beams", beams)
        if len(beams) != self.lattice.n_beams:
            raise ValueError(f"expected {self.lattice.n_beams} beams, got {len(beams)}")
        if [b.index for b in beams] != list(range(1, len(beams) + 1)):
            raise ValueError("beam indices must be 1..N+1 in order")

    @classmethod
    def ideal(cls, lattice: LatticeSpec, profiles=None, base_phase: float = 0.0) -> "BeamSet":
        return cls(lattice, tuple(make_beams(lattice, profiles, base_phase)))

    def beam(self, j: int) -> BeamSpec:
        return self.beams[j - 1]

    def check_site(self, m: int) -> None:
        if abs(m) > self.lattice.half_width:
            raise SiteRangeError(f"site {m} outside addressed range |m| <= {self.lattice.half_width}")


def total_rabi(beam_set: BeamSet, m: int, beams: Sequence[BeamSpec] | None = None) -> complex:
    """Coherent sum ``sum_j exp(i phi_j(m)) Omega_j(m)`` seen by site ``m``.

    ``beams`` restricts the sum to a subset (default: every beam of the set).
    """
    beam_set.check_site(m)
    total = 0j
    for b in beam_set.beams if beams is None else beams:
        total += cmath.rect(amplitude_at(b, m), phase_at(b, m))
    return total


def cancellation_report(N: int) -> float:
    """Largest ``|sum_j exp(i m vartheta_j)|`` over non-target sites ``1 <= |m| <= N``."""
    if N < 1:
        raise ValueError("cancellation needs at least one neighbour (N >= 1)")
    beam_set = BeamSet.ideal(LatticeSpec(N))
    return max(abs(total_rabi(beam_set, m)) for m in beam_set.lattice.sites if m != 0)


def interference_pulses(beam_set: BeamSet, rotation: RotationSpec) -> dict[int, PulseParams]:
    """Effective single pulse at every site for one shared pulse duration.

    The duration is fixed by requiring the target to accumulate ``rotation.xi``
    with phase ``rotation.phi``; every other site gets the area scaled by its
    field strength relative to the target, and the phase shifted by its field
    phase relative to the target.
    """
    target = total_rabi(beam_set, 0)
    if abs(target) == 0.0:
        raise DegenerateTargetError("target site sees zero total Rabi frequency")
    ref_phase = cmath.phase(target)
    pulses = {}
    for m in beam_set.lattice.sites:
        field = total_rabi(beam_set, m)
        mag = abs(field)
        if mag == 0.0:
            pulses[m] = PulseParams(0.0, rotation.phi)
            continue
        pulses[m] = PulseParams(
            rotation.xi * mag / abs(target),
            wrap_phase(cmath.phase(field) - ref_phase + rotation.phi),
        )
    return pulses


@dataclass(frozen=True)
class SiteEvolution:
    m: int
    unitary: np.ndarray
    state: np.ndarray


def initial_states(sites, initial, dim: int = 2) -> dict:
    if initial is None:
        return {m: basis_state(0, dim) for m in sites}
    missing = [m for m in sites if m not in initial]
    if missing:
        raise ValueError(f"initial states missing for sites {missing}")
    return {m: np.asarray(initial[m], dtype=complex) for m in sites}


def simulate_interference(
    beam_set: BeamSet,
    target_rotation: RotationSpec,
    initial: Mapping[int, np.ndarray] | None = None,
) -> dict[int, SiteEvolution]:
    """Evolve every addressed qubit under one interfering pulse.

    ``initial`` maps each site ``m`` to a 2-component state (default ``|0>``).
    Returns ``{m: SiteEvolution}``.
    """
    pulses = interference_pulses(beam_set, target_rotation)
    states = initial_states(beam_set.lattice.sites, initial)
    out = {}
    for m, p in pulses.items():
        u = evolve_pulse(p, QUBIT)
        out[m] = SiteEvolution(m, u, u @ states[m])
    return out
