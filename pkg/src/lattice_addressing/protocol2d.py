"""Single-qubit rotation on one atom of a ``(2N+1) x (2N+1)`` addressed patch.

Each atom has four levels ordered ``(|0>, |1>, |0'>, |1'>)``. The protocol
runs three steps, each a 1D addressing operation whose phases vary along a
single lattice axis:

1. hide: move the row ``m_y = 0`` into the primed levels (phases along y);
2. rotate: drive ``|0'> <-> |1'>`` with phases along x, which reaches only
   the target among the hidden atoms;
3. unhide: the hide pulse with its phase shifted by ``pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .core import PulseParams, RotationSpec, as_state, basis_state, compose, evolve_pulse, make_rotation, max_abs_diff
from .geometry import LatticeSpec
from .interference import BeamSet, interference_pulses
from .sequencer import ScheduleError, log2_exact, sequence_pulses, synthesize

AXES = ("x", "y")
HIDE = "hide"
ROTATE_PRIMED = "rotate_primed"
TRANSITIONS = {
    HIDE: ((0, 2), (1, 3)),
    ROTATE_PRIMED: ((2, 3),),
}
SWAP_AREA = math.pi / 2
PRIMED = slice(2, 4)

Site = tuple[int, int]


def hide_pulse_unitary(area: float, phase: float = 0.0) -> np.ndarray:
    """Drive ``|0> <-> |0'>`` and ``|1> <-> |1'>`` together with one pulse."""
    return _drive_unitary(PulseParams(area, phase), HIDE)


def _drive_unitary(p: PulseParams, transition: str) -> np.ndarray:
    # the transitions of one drive share no level, so their unitaries commute
    return compose((evolve_pulse(p, t, dim=4) for t in TRANSITIONS[transition]), dim=4)


@dataclass
class Lattice2D:
    """Addressed patch with one 4-level atom per site ``(m_x, m_y)``."""

    half_width: int
    states: dict = field(default_factory=dict)
    wavelength_ratio: float = 1.0

    def __post_init__(self):
        N = self.half_width
        if N < 0:
            raise ValueError("half width must be non-negative")
        if not self.states:
            self.states = {s: basis_state(0, 4) for s in self.sites}
        self.states = {tuple(s): as_state(v) for s, v in self.states.items()}
        if set(self.states) != set(self.sites):
            raise ValueError(f"states must cover exactly the {(2 * N + 1) ** 2} patch sites")

    @property
    def sites(self) -> list[Site]:
        r = range(-self.half_width, self.half_width + 1)
        return [(mx, my) for my in r for mx in r]

    @classmethod
    def from_qubits(cls, half_width: int, qubits: Mapping[Site, Sequence[complex]], wavelength_ratio: float = 1.0):
        """Embed 2-component qubit states in the unprimed levels."""
        states = {s: np.concatenate([np.asarray(q, dtype=complex), np.zeros(2)]) for s, q in qubits.items()}
        return cls(half_width, states, wavelength_ratio)

    @classmethod
    def random(cls, half_width: int, rng: np.random.Generator, wavelength_ratio: float = 1.0):
        """Random product state with every atom in the unprimed qubit subspace."""
        r = range(-half_width, half_width + 1)
        qubits = {}
        for my in r:
            for mx in r:
                q = rng.normal(size=2) + 1j * rng.normal(size=2)
                qubits[(mx, my)] = q / np.linalg.norm(q)
        return cls.from_qubits(half_width, qubits, wavelength_ratio)


@dataclass(frozen=True)
class BeamSet2D:
    """1D beam set acting on the patch; phases vary only along ``axis``."""

    axis: str
    transition: str
    beams: BeamSet

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if self.transition not in TRANSITIONS:
            raise ValueError(f"transition must be one of {tuple(TRANSITIONS)}")

    @classmethod
    def ideal(cls, half_width: int, axis: str, transition: str, wavelength_ratio: float = 1.0, profiles=None):
        return cls(axis, transition, BeamSet.ideal(LatticeSpec(half_width, wavelength_ratio, dims=2), profiles))

    def coordinate(self, site: Site) -> int:
        return site[0] if self.axis == "x" else site[1]


def _coordinate_pulses(beam_set: BeamSet, scheme: str, area: float, phase: float) -> dict[int, list[PulseParams]]:
    rotation = RotationSpec(area, phase)
    if scheme == "interference":
        return {m: [p] for m, p in interference_pulses(beam_set, rotation).items()}
    if scheme == "sequential":
        n = beam_set.lattice.n_beams
        schedule = synthesize(log2_exact(n))
        return sequence_pulses(schedule, beam_set, rotation)
    raise ValueError(f"unknown scheme {scheme!r}")


def apply_beamset_2d(
    lattice: Lattice2D, beam_set: BeamSet2D, scheme: str, area: float, phase: float = 0.0
) -> dict[Site, np.ndarray]:
    """Per-site 4x4 unitaries of one addressing step.

    ``area`` and ``phase`` are the pulse the target line (coordinate 0 along
    the axis) receives. The orthogonal coordinate plays no role.
    """
    if beam_set.beams.lattice.half_width != lattice.half_width:
        raise ValueError(
            f"beam set addresses N={beam_set.beams.lattice.half_width}, patch has N={lattice.half_width}"
        )
    if area < 0:
        # U(-a, phi) == U(a, phi + pi)
        area, phase = -area, phase + math.pi
    per_coord = _coordinate_pulses(beam_set.beams, scheme, area, phase)
    by_coord = {
        c: compose((_drive_unitary(p, beam_set.transition) for p in pulses), dim=4)
        for c, pulses in per_coord.items()
    }
    return {s: by_coord[beam_set.coordinate(s)] for s in lattice.sites}


@dataclass(frozen=True)
class SiteRecord:
    site: Site
    fidelity: float
    leaked: float
    residual: float


@dataclass
class ProtocolResult:
    records: list
    net_unitaries: dict
    final_states: dict
    target_unitary: np.ndarray
    expected_target: np.ndarray

    @property
    def target_error(self) -> float:
        return max_abs_diff(self.target_unitary, self.expected_target)

    @property
    def max_leakage(self) -> float:
        return max(r.leaked for r in self.records)

    @property
    def max_residual(self) -> float:
        return max(r.residual for r in self.records)

    @property
    def min_fidelity(self) -> float:
        return min(r.fidelity for r in self.records)


SchemeArg = Union[str, Sequence[str]]


def run_protocol(lattice: Lattice2D, rotation: RotationSpec, scheme: SchemeArg = "interference") -> ProtocolResult:
    """Hide the row ``m_y = 0``, rotate the target in the primed levels, unhide.

    ``scheme`` is ``"interference"``, ``"sequential"`` or a triple naming the
    scheme of each step. Records compare each final state with its expected
    value: the rotated qubit on the target, the initial state elsewhere.
    """
    schemes = (scheme,) * 3 if isinstance(scheme, str) else tuple(scheme)
    if len(schemes) != 3:
        raise ValueError("need one scheme per step")
    for s in schemes:
        if s == "sequential":
            try:
                log2_exact(lattice.half_width + 1)
            except ScheduleError as exc:
                raise ScheduleError(f"sequential steps need N+1 = 2^L: {exc}") from None
    for site, psi in lattice.states.items():
        if np.vdot(psi[PRIMED], psi[PRIMED]).real > 0:
            raise ValueError(f"atom {site} has population in the primed levels")

    N, ratio = lattice.half_width, lattice.wavelength_ratio
    hide = BeamSet2D.ideal(N, "y", HIDE, ratio)
    rotate = BeamSet2D.ideal(N, "x", ROTATE_PRIMED, ratio)
    steps = [
        apply_beamset_2d(lattice, hide, schemes[0], SWAP_AREA, 0.0),
        apply_beamset_2d(lattice, rotate, schemes[1], rotation.xi, rotation.phi),
        apply_beamset_2d(lattice, hide, schemes[2], SWAP_AREA, math.pi),
    ]
    net = {s: compose(step[s] for step in steps) for s in lattice.sites}

    target_u = make_rotation(rotation)
    records, finals = [], {}
    for s in lattice.sites:
        psi0 = lattice.states[s]
        final = net[s] @ psi0
        finals[s] = final
        expected = psi0.copy()
        if s == (0, 0):
            expected[:2] = target_u @ psi0[:2]
        leaked = float(np.vdot(final[PRIMED], final[PRIMED]).real)
        fid = min(1.0, abs(np.vdot(expected, final)) ** 2)
        records.append(SiteRecord(s, fid, leaked, max_abs_diff(final, expected)))
    return ProtocolResult(records, net, finals, net[(0, 0)][:2, :2].copy(), target_u)
