"""Small fixed-size complex linear algebra for qubit and 4-level atoms.

Everything here works on dense numpy arrays of dimension 2 or 4. Pulses are
described only by their area (the accumulated half-angle, the time integral
of Omega/2) and the phase of the Rabi frequency, in units where hbar = 1.

Conventions
-----------
A pulse of area ``a`` and phase ``phi`` on the transition ``(a_lvl, b_lvl)``
evolves the atom by::

    U = cos(a) * I - 1j * sin(a) * (exp(1j*phi) |a><b| + h.c.)

acting as the identity on every other level. ``make_rotation(xi, phi)`` is
the same matrix on the qubit transition with ``a = xi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
UNITARY_TOL = 1e-12
NORM_TOL = 1e-12
SUPPORTED_DIMS = (2, 4)

# Qubit transition |0> <-> |1>.
QUBIT = (0, 1)


class TransitionError(ValueError):
    """Raised for a malformed level selector."""


def wrap_phase(phase: float) -> float:
    """Map an angle onto [0, 2*pi)."""
    wrapped = math.fmod(phase, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod of a tiny negative value can land exactly on 2*pi after the shift
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


@dataclass(frozen=True)
class RotationSpec:
    """Target single-qubit rotation ``cos(xi) - i sin(xi) (e^{i phi}|0><1| + h.c.)``.

    Inputs outside ``xi in [0, pi]`` are folded back using the exact matrix
    identity ``U(xi, phi) = U(-xi, phi + pi)``, so the represented operator
    never changes.
    """

    xi: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.xi) and math.isfinite(self.phi)):
            raise ValueError("rotation angles must be finite")
        xi = wrap_phase(self.xi)
        phi = self.phi
        if xi > math.pi:
            xi = TWO_PI - xi
            phi += math.pi
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "phi", wrap_phase(phi))


@dataclass(frozen=True)
class PulseParams:
    """A single square pulse: area (half-angle) and Rabi-frequency phase."""

    area: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.area) and math.isfinite(self.phase)):
            raise ValueError("pulse parameters must be finite")
        if self.area < 0.0:
            raise ValueError(f"pulse area must be non-negative, got {self.area}")
        object.__setattr__(self, "phase", wrap_phase(self.phase))


def identity(dim: int = 2) -> np.ndarray:
    _check_dim(dim)
    return np.eye(dim, dtype=complex)


def _check_dim(dim: int) -> None:
    if dim not in SUPPORTED_DIMS:
        raise ValueError(f"only dimensions {SUPPORTED_DIMS} are supported, got {dim}")


def unitarity_error(u: np.ndarray) -> float:
    """Max-entry norm of ``U^dagger U - I``."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def as_unitary(matrix, tol: float = UNITARY_TOL) -> np.ndarray:
    """Checked constructor: return ``matrix`` as a read-only complex unitary."""
    u = np.array(matrix, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    _check_dim(u.shape[0])
    if not np.all(np.isfinite(u)):
        raise ValueError("matrix has non-finite entries")
    err = unitarity_error(u)
    if err > tol:
        raise ValueError(f"matrix is not unitary (|U^dag U - I|_max = {err:.3e})")
    u.setflags(write=False)
    return u


def as_state(amplitudes, tol: float = NORM_TOL) -> np.ndarray:
    """Checked constructor for a normalized pure state of dimension 2 or 4."""
    psi = np.array(amplitudes, dtype=complex).reshape(-1)
    _check_dim(psi.size)
    if not np.all(np.isfinite(psi)):
        raise ValueError("state has non-finite amplitudes")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"state is not normalized (|psi|^2 = {norm2!r})")
    psi.setflags(write=False)
    return psi


def basis_state(index: int, dim: int = 2) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return as_state(psi)


def make_rotation(spec: RotationSpec) -> np.ndarray:
    """Qubit rotation ``cos(xi) I - i sin(xi) (e^{i phi}|0><1| + h.c.)``."""
    c, s = math.cos(spec.xi), math.sin(spec.xi)
    e = complex(math.cos(spec.phi), math.sin(spec.phi))
    u = np.array([[c, -1j * s * e], [-1j * s * e.conjugate(), c]], dtype=complex)
    u.setflags(write=False)
    return u


def evolve_pulse(p: PulseParams, transition: Sequence[int] = QUBIT, dim: int = 2) -> np.ndarray:
    """Time evolution of one pulse driving ``transition = (a, b)``.

    The coupling term is ``e^{i phase} |a><b| + h.c.``; levels outside the
    transition are left untouched.
    """
    _check_dim(dim)
    try:
        a, b = (int(i) for i in transition)
    except (TypeError, ValueError) as exc:
        raise TransitionError(f"transition must be a pair of level indices, got {transition!r}") from exc
    if a == b or not (0 <= a < dim and 0 <= b < dim):
        raise TransitionError(f"invalid transition {transition!r} for dimension {dim}")
    c, s = math.cos(p.area), math.sin(p.area)
    e = complex(math.cos(p.phase), math.sin(p.phase))
    u = np.eye(dim, dtype=complex)
    u[a, a] = c
    u[b, b] = c
    u[a, b] = -1j * s * e
    u[b, a] = -1j * s * e.conjugate()
    u.setflags(write=False)
    return u


def compose(ops: Iterable[np.ndarray], dim: int | None = None) -> np.ndarray:
    """Net evolution of ``ops`` listed in the order they are applied.

    The first element acts first, so it is the rightmost factor of the
    product. An empty list gives the identity (of ``dim``, default 2).
    """
    result = None
    for u in ops:
        u = np.asarray(u)
        if result is None:
            result = np.array(u, dtype=complex)
            continue
        if u.shape != result.shape:
            raise ValueError(f"dimension mismatch: {u.shape} vs {result.shape}")
        result = u @ result
    if result is None:
        return identity(2 if dim is None else dim)
    if dim is not None and result.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {result.shape[0]}")
    return result


def commutator_check(p1: PulseParams, p2: PulseParams, rtol: float = 1e-12):
    """Closed-form and direct commutator ``[U2, U1]`` of two subsequent pulses.

    ``p1`` is applied first. For equal areas the commutator is
    ``-(e^{i d} - e^{-i d}) sin^2(area) diag(1, -1)`` with ``d = phase2 - phase1``.

    Returns ``(closed_form, direct)``. ``closed_form`` is ``None`` when the
    areas differ, since the closed form only covers equal drive strengths.
    """
    u1 = evolve_pulse(p1)
    u2 = evolve_pulse(p2)
    direct = u2 @ u1 - u1 @ u2
    if not math.isclose(p1.area, p2.area, rel_tol=rtol, abs_tol=rtol):
        return None, direct
    d = p2.phase - p1.phase
    prefactor = -(np.exp(1j * d) - np.exp(-1j * d)) * math.sin(p1.area) ** 2
    closed = prefactor * np.diag([1.0, -1.0]).astype(complex)
    return closed, direct


def state_overlap(psi: np.ndarray, u: np.ndarray) -> complex:
    """Survival amplitude ``<psi|U|psi>``."""
    psi = np.asarray(psi)
    u = np.asarray(u)
    if u.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: state {psi.size}, operator {u.shape}")
    return complex(np.vdot(psi, u @ psi))


def state_fidelity(psi: np.ndarray, u: np.ndarray) -> float:
    """Survival probability ``|<psi|U|psi>|^2``."""
    return min(1.0, abs(state_overlap(psi, u)) ** 2)


def worst_case_overlap(u: np.ndarray) -> float:
    """``min_psi |<psi|U|psi>|`` for a 2x2 unitary, i.e. ``|tr U| / 2``.

    Any qubit unitary is ``e^{i a}(cos(t) I - i sin(t) n.sigma)``; the overlap
    modulus squared is ``cos^2 t + sin^2 t (n.r)^2`` for Bloch vector ``r``,
    which is smallest for ``r`` orthogonal to the rotation axis.
    """
    u = np.asarray(u)
    if u.shape != (2, 2):
        raise ValueError("worst-case overlap is defined for qubit unitaries only")
    return min(1.0, float(abs(np.trace(u))) / 2.0)


def worst_case_fidelity(u: np.ndarray) -> float:
    """``min_psi |<psi|U|psi>|^2`` over pure qubit states."""
    return worst_case_overlap(u) ** 2


def bloch_grid(n_theta: int = 101, n_phi: int = 100) -> np.ndarray:
    """Pure states on a latitude/longitude grid of the Bloch sphere (poles included)."""
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    t, p = t.ravel(), p.ravel()
    return np.stack([np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2)], axis=1)


def worst_case_fidelity_grid(u: np.ndarray, n_theta: int = 101, n_phi: int = 100) -> float:
    """Brute-force minimum of ``|<psi|U|psi>|^2`` over a Bloch-sphere grid."""
    psis = bloch_grid(n_theta, n_phi)
    amps = np.einsum("ki,ij,kj->k", psis.conj(), np.asarray(u), psis)
    return float(np.min(np.abs(amps) ** 2))


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
