"""Scenario files: strict JSON documents describing one CLI run.

Unknown fields anywhere are rejected so that a misspelled physics parameter
cannot silently fall back to a default.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from .core import RotationSpec
from .geometry import Explicit, Gaussian, LatticeSpec, Uniform
from .mismatch import MismatchSpec
from .sequencer import PulseSchedule, ScheduleError, log2_exact

MODES = ("plan", "synthesize", "simulate", "sweep", "verify")
SCHEMES = ("interference", "sequential")
FORMATS = ("csv", "structured")

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "mode": {"enum": list(MODES)},
        "lattice": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "N": {"type": "integer", "minimum": 0},
                "L": {"type": "integer", "minimum": 1},
                "dims": {"enum": [1, 2]},
                "wavelength_ratio": _positive,
            },
        },
        "rotation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["xi"],
            "properties": {"xi": _number, "phi": _number},
        },
        "scheme": {"enum": list(SCHEMES)},
        "profile": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["uniform", "gaussian", "explicit"]},
                "omega0": {"type": "number", "minimum": 0},
                "waist": _positive,
                "tables": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "patternProperties": {"^-?[0-9]+$": {"type": "number", "minimum": 0}},
                        "additionalProperties": False,
                    },
                },
            },
        },
        "mismatch": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "r": _positive,
                "r_min": _positive,
                "r_max": _positive,
                "steps": {"type": "integer", "minimum": 1},
                "worst_case": {"type": "boolean"},
                "edge_amplitude": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "schedule": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sigma": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "file": {"type": "string"},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": list(FORMATS)}},
        },
    },
}


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario."""


@dataclass(frozen=True)
class Scenario:
    raw: dict
    name: str
    mode: str | None
    lattice: LatticeSpec | None
    rotation: RotationSpec | None
    scheme: str | None
    profile: Any
    mismatch: dict | None
    schedule: PulseSchedule | None
    seed: int
    output_path: str | None
    output_format: str | None

    def require(self, *fields: str) -> None:
        missing = [f for f in fields if getattr(self, f) is None]
        if missing:
            raise ScenarioError(f"mode {self.mode or '?'} requires field(s): {', '.join(missing)}")


def _lattice(spec: dict | None) -> LatticeSpec | None:
    if spec is None:
        return None
    if ("N" in spec) == ("L" in spec):
        raise ScenarioError("lattice needs exactly one of N or L")
    N = spec["N"] if "N" in spec else 2 ** spec["L"] - 1
    return LatticeSpec(N, spec.get("wavelength_ratio", 1.0), spec.get("dims", 1))


def _profile(spec: dict | None, lattice: LatticeSpec | None):
    if spec is None:
        return None
    kind = spec["kind"]
    omega0 = spec.get("omega0", 1.0)
    extra = set(spec) - {"kind", "omega0"}
    allowed = {"uniform": set(), "gaussian": {"waist"}, "explicit": {"tables"}}[kind]
    if extra - allowed:
        raise ScenarioError(f"profile kind {kind!r} does not take {sorted(extra - allowed)}")
    if kind == "uniform":
        return Uniform(omega0)
    if kind == "gaussian":
        if "waist" not in spec:
            raise ScenarioError("gaussian profile needs a waist")
        return Gaussian(omega0, spec["waist"])
    tables = spec.get("tables")
    if not tables:
        raise ScenarioError("explicit profile needs per-beam tables")
    if lattice is not None and len(tables) != lattice.n_beams:
        raise ScenarioError(f"explicit profile needs {lattice.n_beams} tables, got {len(tables)}")
    return [Explicit({int(k): v for k, v in t.items()}, omega0) for t in tables]


def mismatch_spec(mismatch: dict, r: float | None = None) -> MismatchSpec:
    return MismatchSpec(
        mismatch.get("r", 1.0) if r is None else r,
        mismatch.get("worst_case", True),
        mismatch.get("edge_amplitude", 1.0),
    )


def load_schedule_file(path: str | Path) -> PulseSchedule:
    """Read the schedule back from a ``synthesize`` report (structured or CSV)."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        try:
            sched = doc["schedule"]
            return PulseSchedule(sched["L"], tuple(sched["sigma"]), sched["per_pulse_area"])
        except KeyError as exc:
            raise ScenarioError(f"{path}: not a synthesize report (missing {exc})") from None
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows or "beam" not in rows[0]:
        raise ScenarioError(f"{path}: not a synthesize report")
    rows.sort(key=lambda r: int(r["k"]))
    return PulseSchedule.from_sigma([int(r["beam"]) for r in rows], float(rows[0]["area"]))


def parse_scenario(doc: dict, base_dir: Path | None = None) -> Scenario:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"invalid scenario at {where}: {exc.message}") from None
    try:
        lattice = _lattice(doc.get("lattice"))
        rotation = RotationSpec(doc["rotation"]["xi"], doc["rotation"].get("phi", 0.0)) if "rotation" in doc else None
        profile = _profile(doc.get("profile"), lattice)
        schedule = None
        if "schedule" in doc:
            s = doc["schedule"]
            if ("sigma" in s) == ("file" in s):
                raise ScenarioError("schedule needs exactly one of sigma or file")
            if "sigma" in s:
                schedule = PulseSchedule.from_sigma(s["sigma"])
            else:
                path = Path(s["file"])
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                schedule = load_schedule_file(path)
        mismatch = doc.get("mismatch")
        if mismatch is not None:
            mismatch_spec(mismatch)
    except ScheduleError as exc:
        raise ScenarioError(str(exc)) from None
    except (ValueError, TypeError, OSError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from None

    scheme = doc.get("scheme")
    if scheme == "sequential" and lattice is not None:
        try:
            log2_exact(lattice.n_beams)
        except ScheduleError as exc:
            raise ScenarioError(f"sequential scheme: {exc}") from None
    out = doc.get("output", {})
    return Scenario(
        raw=doc,
        name=doc.get("name", "unnamed"),
        mode=doc.get("mode"),
        lattice=lattice,
        rotation=rotation,
        scheme=scheme,
        profile=profile,
        mismatch=mismatch,
        schedule=schedule,
        seed=doc.get("seed", 0),
        output_path=out.get("path"),
        output_format=out.get("format"),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    return parse_scenario(doc, path.parent)
