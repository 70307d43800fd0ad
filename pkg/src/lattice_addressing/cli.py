"""Command-line front end.

Exit codes: 0 pass, 1 physics/validation failure, 2 malformed scenario or
unreadable/unwritable file, 3 infeasible beam geometry.
"""

from __future__ import annotations

import argparse
import io
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import identity, make_rotation, max_abs_diff, worst_case_fidelity
from .geometry import InfeasibleGeometryError, make_beams
from .interference import BeamSet, cancellation_report, interference_pulses, simulate_interference, total_rabi
from .mismatch import PI_ROTATION_XI, simulated_neighbor_fidelity
from .protocol2d import Lattice2D, run_protocol
from .scenario import FORMATS, MODES, Scenario, ScenarioError, load_scenario, mismatch_spec
from .sequencer import ScheduleError, log2_exact, schedule_records, simulate_sequence, synthesize, validate
from .verify import run_all

EXIT_PASS, EXIT_FAIL, EXIT_MALFORMED, EXIT_INFEASIBLE = 0, 1, 2, 3
TOOL = "lattice-addressing"
DEFAULT_TOL = {"plan": 1e-12, "synthesize": 1e-10, "simulate": 1e-10, "sweep": 1e-9, "verify": 1e-10}
LEAKAGE_TOL = 1e-20
ANCHOR_RATIOS = (0.9, 0.96)


@dataclass
class Report:
    mode: str
    scenario: dict
    columns: list
    rows: list
    summary: dict
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("pass"))

    def header(self, timestamp: str | None) -> dict:
        head = {"tool": TOOL, "version": __version__}
        if timestamp is not None:
            head["timestamp"] = timestamp
        return head

    def to_structured(self, timestamp: str | None = None) -> str:
        doc = self.header(timestamp)
        doc.update(mode=self.mode, scenario=self.scenario, summary=self.summary, **self.extra)
        doc["columns"] = self.columns
        doc["rows"] = self.rows
        return json.dumps(_jsonable(doc), indent=2) + "\n"

    def to_csv(self, timestamp: str | None = None) -> str:
        buf = io.StringIO()
        for key, value in self.header(timestamp).items():
            buf.write(f"# {key}={value}\n")
        buf.write(f"# mode={self.mode}\n")
        for key, value in self.summary.items():
            buf.write(f"# {key}={_fmt(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(row[c]) for c in self.columns])
        return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _summary(max_residual, min_fidelity, passed: bool, **more) -> dict:
    out = {"max_residual": max_residual, "min_fidelity": min_fidelity, "pass": bool(passed)}
    out.update(more)
    return out


# -- commands -----------------------------------------------------------------


def cmd_plan(sc: Scenario, tol: float) -> Report:
    sc.require("lattice")
    lat = sc.lattice
    beams = make_beams(lat)
    rows = [
        {
            "j": b.index,
            "site_phase": b.site_phase,
            "tilt": b.tilt,
            "tilt_deg": math.degrees(b.tilt),
            "sin_tilt": math.sin(b.tilt),
        }
        for b in beams
    ]
    residual = cancellation_report(lat.half_width) if lat.half_width else 0.0
    return Report(
        "plan", sc.raw, ["j", "site_phase", "tilt", "tilt_deg", "sin_tilt"], rows,
        _summary(residual, None, residual <= tol),
    )


def cmd_synthesize(sc: Scenario, tol: float) -> Report:
    sc.require("lattice")
    lat = sc.lattice
    try:
        L = log2_exact(lat.n_beams)
    except ScheduleError as exc:
        raise ScenarioError(f"sequential schedules need N+1 = 2^L (L >= 1): {exc}") from None
    xi = sc.rotation.xi if sc.rotation is not None else PI_ROTATION_XI
    schedule = synthesize(L, xi / 2**L)
    report = validate(schedule, lat, tol)
    sites = list(lat.sites)
    columns = ["k", "beam", "site_phase", "tilt", "area"] + [f"phase[{m}]" for m in sites]
    rows = []
    for rec in schedule_records(schedule, lat.wavelength_ratio):
        row = {c: rec[c] for c in ("k", "beam", "site_phase", "tilt", "area")}
        row.update({f"phase[{m}]": rec["phases"][m] for m in sites})
        rows.append(row)
    summary = _summary(
        report.max_residual, None, report.ok,
        group_levels=list(report.group_levels), bruteforce_ok=report.bruteforce_ok,
    )
    extra = {"schedule": {"L": L, "sigma": list(schedule.sigma), "per_pulse_area": schedule.per_pulse_area}}
    return Report("synthesize", sc.raw, columns, rows, summary, extra)


def _site_row(m: int, u: np.ndarray, expected: np.ndarray) -> dict:
    return {
        "m": m,
        "fidelity": worst_case_fidelity(expected.conj().T @ u),
        "residual": max_abs_diff(u, expected),
    }


def _simulate_1d(sc: Scenario, tol: float) -> Report:
    lat, rot = sc.lattice, sc.rotation
    scheme = sc.scheme or "interference"
    profiles = sc.profile
    mm = None
    if sc.mismatch is not None:
        if "r" not in sc.mismatch:
            raise ScenarioError("simulate with a mismatch needs mismatch.r")
        if profiles is not None:
            raise ScenarioError("give either profile or mismatch, not both")
        if lat.half_width != 1:
            raise ScenarioError("the mismatch model is defined for three-qubit addressing (N = 1)")
        mm = mismatch_spec(sc.mismatch)
        profiles = mm.profiles(1)

    if scheme == "interference":
        beam_set = BeamSet.ideal(lat, profiles)
        pulses = interference_pulses(beam_set, rot)
        sites = simulate_interference(beam_set, rot)
        columns = ["m", "field", "area", "phase", "fidelity", "residual"]
    else:
        L = log2_exact(lat.n_beams)
        schedule = sc.schedule if sc.schedule is not None else synthesize(L)
        if schedule.n_pulses != lat.n_beams:
            raise ScenarioError(f"schedule has {schedule.n_pulses} pulses, lattice needs {lat.n_beams}")
        sites = simulate_sequence(schedule, lat, rot, profiles=profiles)
        columns = ["m", "net_angle", "fidelity", "residual"]

    rows = []
    for m, ev in sites.items():
        expected = make_rotation(rot) if m == 0 else identity(2)
        row = _site_row(m, ev.unitary, expected)
        if scheme == "interference":
            row.update(field=abs(total_rabi(beam_set, m)), area=pulses[m].area, phase=pulses[m].phase)
        else:
            row["net_angle"] = math.acos(min(1.0, abs(np.trace(ev.unitary)) / 2))
        rows.append(row)

    max_res = max(r["residual"] for r in rows)
    min_fid = min(r["fidelity"] for r in rows)
    if mm is None:
        return Report("simulate", sc.raw, columns, rows, _summary(max_res, min_fid, max_res <= tol))
    predicted = mm.predicted_fidelity(rot.xi)
    target_res = next(r["residual"] for r in rows if r["m"] == 0)
    neighbor_fid = min(r["fidelity"] for r in rows if r["m"] != 0)
    ok = target_res <= tol and abs(neighbor_fid - predicted) <= tol
    return Report(
        "simulate", sc.raw, columns, rows,
        _summary(max_res, min_fid, ok, closed_form_fidelity=predicted),
    )


def _simulate_2d(sc: Scenario, tol: float) -> Report:
    if sc.profile is not None or sc.mismatch is not None or sc.schedule is not None:
        raise ScenarioError("the 2D protocol runs with ideal synthesized beams; drop profile/mismatch/schedule")
    lat = sc.lattice
    patch = Lattice2D.random(lat.half_width, np.random.default_rng(sc.seed), lat.wavelength_ratio)
    res = run_protocol(patch, sc.rotation, sc.scheme or "interference")
    rows = [
        {"m_x": r.site[0], "m_y": r.site[1], "fidelity": r.fidelity, "leaked": r.leaked, "residual": r.residual}
        for r in res.records
    ]
    ok = res.target_error <= tol and res.max_residual <= tol and res.max_leakage <= LEAKAGE_TOL
    summary = _summary(
        max(res.max_residual, res.target_error), res.min_fidelity, ok,
        target_error=res.target_error, max_leakage=res.max_leakage,
    )
    return Report("simulate", sc.raw, ["m_x", "m_y", "fidelity", "leaked", "residual"], rows, summary)


def cmd_simulate(sc: Scenario, tol: float) -> Report:
    sc.require("lattice", "rotation")
    if sc.lattice.dims == 2:
        return _simulate_2d(sc, tol)
    return _simulate_1d(sc, tol)


def sweep_ratios(r_min: float, r_max: float, steps: int) -> list[float]:
    """Evenly spaced ratios plus the anchor ratios that fall in range, sorted and de-duplicated."""
    if not 0 < r_min <= r_max:
        raise ScenarioError(f"empty sweep range [{r_min}, {r_max}]")
    if steps < 1:
        raise ScenarioError("sweep needs at least one step")
    if r_min == r_max:
        grid = [float(r_min)]
    else:
        grid = [float(r) for r in np.linspace(r_min, r_max, max(steps, 2))]
    grid += [a for a in ANCHOR_RATIOS if r_min <= a <= r_max]
    return sorted(set(grid))


def cmd_sweep(sc: Scenario, tol: float) -> Report:
    mm = sc.mismatch
    if mm is None or "r_min" not in mm or "r_max" not in mm:
        raise ScenarioError("sweep needs mismatch.r_min and mismatch.r_max")
    xi = sc.rotation.xi if sc.rotation is not None else PI_ROTATION_XI
    rows = []
    for r in sweep_ratios(mm["r_min"], mm["r_max"], mm.get("steps", 11)):
        spec = mismatch_spec(mm, r)
        rows.append(
            {
                "r": r,
                "F_interference": simulated_neighbor_fidelity(spec, "interference", xi),
                "F_sequential": simulated_neighbor_fidelity(spec, "sequential", xi),
                "closed_form": spec.predicted_fidelity(xi),
            }
        )
    dev = max(
        max(abs(row["F_interference"] - row["closed_form"]), abs(row["F_sequential"] - row["closed_form"]))
        for row in rows
    )
    min_fid = min(min(row["F_interference"], row["F_sequential"]) for row in rows)
    columns = ["r", "F_interference", "F_sequential", "closed_form"]
    return Report("sweep", sc.raw, columns, rows, _summary(dev, min_fid, dev <= tol))


def cmd_verify(sc: Scenario | None, tol: float) -> Report:
    schedule = sc.schedule if sc is not None else None
    half_width = sc.lattice.half_width if sc is not None and sc.lattice is not None else None
    seed = sc.seed if sc is not None else 0
    results = run_all(schedule=schedule, half_width=half_width, seed=seed, tol=tol)
    rows = [{"suite": r.name, "pass": r.ok, "max_residual": r.max_residual, "detail": r.detail} for r in results]
    failed = [r.name for r in results if not r.ok]
    summary = _summary(max(r.max_residual for r in results), None, not failed, failed=failed)
    return Report("verify", sc.raw if sc is not None else {}, ["suite", "pass", "max_residual", "detail"], rows, summary)


COMMANDS = {
    "plan": cmd_plan,
    "synthesize": cmd_synthesize,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


# -- driver -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in MODES:
        p = sub.add_parser(name)
        p.add_argument("--scenario", type=Path, required=name != "verify")
        p.add_argument("--out", type=Path)
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--no-timestamp", action="store_true")
        if name == "verify":
            p.add_argument("--all", action="store_true", help="run every suite (the default)")
    return parser


def run(command: str, scenario: Scenario | None, tol: float | None = None) -> Report:
    """Execute one command on a parsed scenario and return its report."""
    if scenario is not None and scenario.mode is not None and scenario.mode != command:
        raise ScenarioError(f"scenario mode {scenario.mode!r} does not match command {command!r}")
    if tol is None:
        tol = DEFAULT_TOL[command]
    return COMMANDS[command](scenario, tol)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario) if args.scenario is not None else None
        report = run(args.command, scenario, args.tolerance)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except InfeasibleGeometryError as exc:
        print(f"infeasible geometry: {exc}", file=sys.stderr)
        for j, vt, s in exc.beams:
            print(f"  beam {j}: site phase {vt:.17g} rad needs sin(theta) = {s:.17g}", file=sys.stderr)
        return EXIT_INFEASIBLE

    out = args.out or (Path(scenario.output_path) if scenario and scenario.output_path else None)
    fmt = args.format or (scenario.output_format if scenario else None)
    if fmt is None:
        fmt = "csv" if out is not None and out.suffix == ".csv" else "structured"
    stamp = None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = report.to_csv(stamp) if fmt == "csv" else report.to_structured(stamp)
    try:
        if out is None:
            sys.stdout.write(text)
        else:
            out.write_text(text)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_MALFORMED

    if not report.passed:
        failed = report.summary.get("failed")
        print(f"FAIL: {', '.join(failed) if failed else report.mode}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
