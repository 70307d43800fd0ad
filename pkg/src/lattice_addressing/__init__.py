"""Single-qubit rotations in 1D and 2D optical lattices under multi-qubit addressing."""

__version__ = "0.1.0"

from .core import (
    PulseParams,
    RotationSpec,
    commutator_check,
    compose,
    evolve_pulse,
    make_rotation,
    state_fidelity,
    worst_case_fidelity,
)
from .geometry import Explicit, Gaussian, LatticeSpec, Uniform, amplitude_at, phase_at, site_phases, tilt_angle
from .interference import BeamSet, cancellation_report, simulate_interference, total_rabi
from .mismatch import MismatchSpec, compare_schemes, fidelity_sweep, neighbor_fidelity_bound
from .protocol2d import Lattice2D, hide_pulse_unitary, run_protocol
from .sequencer import PulseSchedule, simulate_sequence, synthesize, validate_groups, verify_bruteforce
