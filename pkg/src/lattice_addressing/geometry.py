"""Beam geometry: site phases, tilt angles and per-site Rabi amplitudes.

Sites of the addressed chain are labelled ``m = -N..N`` with the target at
``m = 0``. Beam ``j`` (``j = 1..N+1``) advances its Rabi-frequency phase by
``vartheta_j`` per lattice site, so that at site ``m`` the phase reads
``m * vartheta_j + base_phase``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

from .core import TWO_PI, wrap_phase

# sin(theta) overshoot below this is floating-point noise, not geometry
SIN_ROUNDING = 1e-12


class InfeasibleGeometryError(ValueError):
    """A requested site phase needs ``|sin(theta)| > 1``."""

    def __init__(self, message: str, beams: tuple = ()):
        super().__init__(message)
        self.beams = beams


class SiteRangeError(ValueError):
    """Site index outside the addressed range ``|m| <= N``."""


def normalize_site_phase(vartheta: float) -> float:
    """Map an angle onto ``(-pi, pi]``."""
    w = wrap_phase(vartheta)
    return w - TWO_PI if w > math.pi else w


def phase_step(j: int, n_beams: int) -> int:
    """Integer numerator ``k`` of ``vartheta_j = 2*pi*k/n_beams``, with ``k`` in ``(-n/2, n/2]``."""
    k = (j - 1) % n_beams
    return k - n_beams if 2 * k > n_beams else k


def site_phases(N: int) -> list[float]:
    """Per-site phase advance of each of the ``N+1`` beams, normalized to ``(-pi, pi]``."""
    if N < 0:
        raise ValueError(f"half width must be non-negative, got {N}")
    n = N + 1
    return [math.pi if 2 * phase_step(j, n) == n else TWO_PI * phase_step(j, n) / n for j in range(1, n + 1)]


def tilt_angle(vartheta: float, wavelength_ratio: float) -> float:
    """Beam inclination ``theta`` with ``sin(theta) = (vartheta/pi) * lambda_L/lambda_T``."""
    if wavelength_ratio <= 0:
        raise ValueError("wavelength ratio must be positive")
    s = vartheta / math.pi * wavelength_ratio
    if 1.0 < abs(s) <= 1.0 + SIN_ROUNDING:
        s = math.copysign(1.0, s)
    if abs(s) > 1.0:
        raise InfeasibleGeometryError(
            f"site phase {vartheta:.6g} needs sin(theta) = {s:.6g}, outside [-1, 1]"
        )
    return math.asin(s)


@dataclass(frozen=True)
class LatticeSpec:
    half_width: int
    wavelength_ratio: float = 1.0
    dims: int = 1

    def __post_init__(self):
        if int(self.half_width) != self.half_width or self.half_width < 0:
            raise ValueError(f"half_width must be a non-negative integer, got {self.half_width}")
        if not self.wavelength_ratio > 0:
            raise ValueError(f"wavelength_ratio must be positive, got {self.wavelength_ratio}")
        if self.dims not in (1, 2):
            raise ValueError(f"dims must be 1 or 2, got {self.dims}")

    @property
    def n_beams(self) -> int:
        return self.half_width + 1

    @property
    def sites(self) -> range:
        return range(-self.half_width, self.half_width + 1)


@dataclass(frozen=True)
class Uniform:
    omega0: float = 1.0

    def __post_init__(self):
        if self.omega0 < 0:
            raise ValueError("amplitude must be non-negative")


@dataclass(frozen=True)
class Gaussian:
    """Gaussian beam centred on the target; ``waist`` in units of the site spacing."""

    omega0: float = 1.0
    waist: float = 1.0

    def __post_init__(self):
        if self.omega0 < 0 or not self.waist > 0:
            raise ValueError("need omega0 >= 0 and waist > 0")


@dataclass(frozen=True)
class Explicit:
    """Per-site amplitude ratios ``Omega_j(m) / omega0``."""

    table: Mapping[int, float]
    omega0: float = 1.0

    def __post_init__(self):
        table = {int(m): float(v) for m, v in dict(self.table).items()}
        if any(v < 0 for v in table.values()) or self.omega0 < 0:
            raise ValueError("amplitudes must be non-negative")
        object.__setattr__(self, "table", table)

    @classmethod
    def symmetric(cls, center: float, ratios: Mapping[int, float], omega0: float = 1.0) -> "Explicit":
        """Table with ``table[0] = center`` and ``table[+-m] = ratios[m]``."""
        table = {0: center}
        for m, v in ratios.items():
            table[m] = v
            table[-m] = v
        return cls(table, omega0)


AmplitudeProfile = Union[Uniform, Gaussian, Explicit]


@dataclass(frozen=True)
class BeamSpec:
    index: int
    site_phase: float
    half_width: int
    tilt: float = 0.0
    profile: AmplitudeProfile = field(default_factory=Uniform)
    base_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "site_phase", normalize_site_phase(self.site_phase))
        if not (math.isfinite(self.site_phase) and math.isfinite(self.tilt)):
            raise InfeasibleGeometryError(f"beam {self.index}: non-finite site phase or tilt")
        if isinstance(self.profile, Explicit):
            missing = [m for m in range(-self.half_width, self.half_width + 1) if m not in self.profile.table]
            if missing:
                raise ValueError(f"beam {self.index}: explicit profile lacks sites {missing}")

    def check_site(self, m: int) -> None:
        if abs(m) > self.half_width:
            raise SiteRangeError(f"site {m} outside addressed range |m| <= {self.half_width}")


def make_beams(
    lattice: LatticeSpec,
    profiles=None,
    base_phase: float = 0.0,
) -> list[BeamSpec]:
    """The ``N+1`` beams that cancel on every non-target site.

    ``profiles`` is one profile shared by all beams, or a sequence with one
    entry per beam. Raises :class:`InfeasibleGeometryError` listing every
    beam whose tilt cannot be realized.
    """
    n = lattice.n_beams
    if profiles is None:
        profiles = [Uniform()] * n
    elif isinstance(profiles, (Uniform, Gaussian, Explicit)):
        profiles = [profiles] * n
    else:
        profiles = list(profiles)
        if len(profiles) != n:
            raise ValueError(f"need {n} profiles, got {len(profiles)}")
    phases = site_phases(lattice.half_width)
    bad = []
    tilts = []
    for j, vt in enumerate(phases, start=1):
        try:
            tilts.append(tilt_angle(vt, lattice.wavelength_ratio))
        except InfeasibleGeometryError:
            bad.append((j, vt, vt / math.pi * lattice.wavelength_ratio))
            tilts.append(float("nan"))
    if bad:
        names = ", ".join(f"beam {j} (sin theta = {s:.6g})" for j, _, s in bad)
        raise InfeasibleGeometryError(f"infeasible tilt for {names}", beams=tuple(bad))
    return [
        BeamSpec(j, vt, lattice.half_width, th, prof, base_phase)
        for j, (vt, th, prof) in enumerate(zip(phases, tilts, profiles), start=1)
    ]


def phase_at(beam: BeamSpec, m: int) -> float:
    """Phase of beam ``j`` at site ``m``: ``m * vartheta_j + base_phase`` in ``[0, 2*pi)``."""
    beam.check_site(m)
    return wrap_phase(m * beam.site_phase + beam.base_phase)


def amplitude_at(beam: BeamSpec, m: int) -> float:
    beam.check_site(m)
    prof = beam.profile
    if isinstance(prof, Uniform):
        return prof.omega0
    if isinstance(prof, Gaussian):
        x = m * math.cos(beam.tilt) / prof.waist
        return prof.omega0 * math.exp(-x * x)
    if isinstance(prof, Explicit):
        try:
            return prof.omega0 * prof.table[m]
        except KeyError:
            raise ValueError(f"beam {beam.index}: explicit profile has no entry for site {m}") from None
    raise TypeError(f"unknown amplitude profile {prof!r}")
