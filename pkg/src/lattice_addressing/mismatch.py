"""Neighbour disturbance when the tilted beam is weaker on the outer sites.

Three-qubit addressing (``N = 1``): beam 2 reaches the sites ``m = +-1``
with amplitude ``r`` times that of beam 1. In the worst case beam 1 is as
strong on the neighbours as on the target, so the neighbours pick up a
residual rotation of half-angle ``(1 - r) * xi / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RotationSpec, worst_case_fidelity, worst_case_overlap
from .geometry import Explicit, LatticeSpec
from .interference import BeamSet, simulate_interference
from .sequencer import simulate_sequence, synthesize

SCHEMES = ("interference", "sequential")
PI_ROTATION_XI = math.pi / 2  # half-angle of a full population flip


@dataclass(frozen=True)
class MismatchSpec:
    """Amplitude ratio ``r = Omega_2(+-1) / Omega_1(+-1)`` of the tilted beam.

    ``edge_amplitude`` is ``Omega_1(+-1) / Omega_1(0)``; ``worst_case`` pins
    it to 1.
    """

    r: float
    worst_case: bool = True
    edge_amplitude: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"amplitude ratio must be positive, got {self.r}")
        if self.worst_case:
            object.__setattr__(self, "edge_amplitude", 1.0)
        elif not 0 < self.edge_amplitude <= 1:
            raise ValueError("edge amplitude must lie in (0, 1]")

    def predicted_fidelity(self, target_xi: float = PI_ROTATION_XI) -> float:
        """Closed-form neighbour fidelity ``cos^2((1-r) e xi / 2)`` for edge amplitude ``e``."""
        return math.cos((1.0 - self.r) * self.edge_amplitude * target_xi / 2.0) ** 2

    def profiles(self, N: int = 1) -> list[Explicit]:
        """Explicit per-beam tables: beam 1 unperturbed, every tilted beam scaled by ``r`` off target."""
        edge = {m: self.edge_amplitude for m in range(1, N + 1)}
        first = Explicit.symmetric(1.0, edge)
        tilted = Explicit.symmetric(1.0, {m: self.r * v for m, v in edge.items()})
        return [first] + [tilted] * N


@dataclass(frozen=True)
class FidelityCurve:
    samples: tuple[tuple[float, float], ...]

    @property
    def r(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def fidelity(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])


def neighbor_fidelity_bound(r: float, target_xi: float = PI_ROTATION_XI) -> float:
    """Worst-case probability that a neighbour keeps its state: ``cos^2((1-r) xi / 2)``."""
    if not r > 0:
        raise ValueError("amplitude ratio must be positive")
    return math.cos((1.0 - r) * target_xi / 2.0) ** 2


def neighbor_overlap_bound(r: float, target_xi: float = PI_ROTATION_XI) -> float:
    """Amplitude form ``|cos((1-r) xi / 2)|`` of :func:`neighbor_fidelity_bound`."""
    return abs(math.cos((1.0 - r) * target_xi / 2.0))


def neighbor_unitaries(mismatch: MismatchSpec, scheme: str, target_xi: float = PI_ROTATION_XI, phi: float = 0.0) -> dict:
    """Simulated unitaries of the ``N = 1`` chain under the given mismatch."""
    lattice = LatticeSpec(1)
    rotation = RotationSpec(target_xi, phi)
    profiles = mismatch.profiles(1)
    if scheme == "interference":
        sites = simulate_interference(BeamSet.ideal(lattice, profiles), rotation)
    elif scheme == "sequential":
        sites = simulate_sequence(synthesize(1), lattice, rotation, profiles=profiles)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return {m: ev.unitary for m, ev in sites.items()}


def simulated_neighbor_fidelity(
    mismatch: MismatchSpec, scheme: str, target_xi: float = PI_ROTATION_XI, amplitude: bool = False
) -> float:
    """Minimum over the two neighbours of the worst-case survival fidelity."""
    units = neighbor_unitaries(mismatch, scheme, target_xi)
    measure = worst_case_overlap if amplitude else worst_case_fidelity
    return min(measure(units[m]) for m in (-1, 1))


def fidelity_sweep(
    r_min: float,
    r_max: float,
    steps: int,
    scheme: str = "interference",
    target_xi: float = PI_ROTATION_XI,
    check_tol: float = 1e-10,
) -> FidelityCurve:
    """Simulated neighbour fidelity on ``steps`` evenly spaced ratios.

    Every sample is checked against :func:`neighbor_fidelity_bound`; a
    disagreement beyond ``check_tol`` raises ``AssertionError``.
    """
    if not 0 < r_min <= r_max:
        raise ValueError(f"need 0 < r_min <= r_max, got [{r_min}, {r_max}]")
    if steps < 2:
        raise ValueError("a sweep needs at least two steps")
    samples = []
    for r in np.linspace(r_min, r_max, steps):
        r = float(r)
        f = simulated_neighbor_fidelity(MismatchSpec(r), scheme, target_xi)
        bound = neighbor_fidelity_bound(r, target_xi)
        if abs(f - bound) > check_tol:
            raise AssertionError(f"simulation {f!r} disagrees with closed form {bound!r} at r={r}")
        samples.append((r, f))
    return FidelityCurve(tuple(samples))


def compare_schemes(r: float, target_xi: float = PI_ROTATION_XI) -> tuple[float, float, float]:
    """Neighbour fidelities from both full simulations and their absolute difference."""
    mm = MismatchSpec(r)
    f_int = simulated_neighbor_fidelity(mm, "interference", target_xi)
    f_seq = simulated_neighbor_fidelity(mm, "sequential", target_xi)
    return f_int, f_seq, abs(f_int - f_seq)
