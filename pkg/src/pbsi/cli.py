"""Command-line front end.

Every command writes plain files: CSV tables (header row, fixed column
order, shortest round-trip float repr) and a JSON document with top-level
``schema_version``, ``config`` and ``results``. Identical configurations
produce byte-identical files.

Settings are layered: built-in preset defaults < ``--config`` file (flat
``key=value`` lines) < command-line flags.

Exit codes: 0 success, 1 usage error, 2 numeric or analysis failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from pbsi import analysis, cavity, interferometer, sagnac
from pbsi.errors import DomainError, UnresolvedError, UsageError
from pbsi.interferometer import Mode, System
from pbsi.tables import SweepGrid, SweepTable

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "PBSI_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

TWO_PI = 2 * math.pi
HALF_PI = math.pi / 2

# name -> (type, preset default)
_SETTINGS = {
    "start": (float, -TWO_PI),
    "end": (float, TWO_PI),
    "steps": (int, 4001),
    "mode": (str, "antiphase"),
    "r": (float, 0.999),
    "delta": (float, math.pi),
    "max_order": (int, cavity.DEFAULT_MAX_ORDER),
    "epsilon": (float, cavity.DEFAULT_EPSILON),
    "area": (float, 1.0),
    "wavelength": (float, 633e-9),
    "rotation_rate": (float, sagnac.EARTH_ROTATION_RATE),
    "phase_resolution": (float, None),
    "column": (str, "i_a"),
    "baseline": (float, 0.0),
    "format": (str, "csv"),
}

_COMMAND_SETTINGS = {
    "sweep-mzi": ("start", "end", "steps", "mode", "format"),
    "sweep-ccd": ("start", "end", "steps", "mode", "format"),
    "sweep-cavity": ("start", "end", "steps", "r", "delta", "max_order", "epsilon", "format"),
    "sagnac": ("area", "wavelength", "rotation_rate", "phase_resolution", "r", "max_order", "epsilon"),
    "analyze": ("column", "baseline"),
    "fig2": ("steps",),
    "fig3": ("steps",),
    "fig4": ("r", "delta", "max_order", "epsilon"),
}

_PRESET_OVERRIDES = {
    "sweep-cavity": {"start": 0.0, "end": math.pi, "steps": 20001},
}

FIG4_PANELS = "bcdefgh"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- formatting ------------------------------------------------------------


def _fmt(v) -> str:
    return repr(float(v))


def table_to_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.data:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv_table(path) -> SweepTable:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise UsageError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    try:
        data = np.array([[float(v) for v in row] for row in body], dtype=float)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if data.size == 0:
        raise UsageError(f"{path}: no data rows")
    return SweepTable(tuple(header), data)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def json_document(config: dict, results: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "config": config, "results": results}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def table_results(table: SweepTable) -> dict:
    return {"columns": list(table.columns), "rows": table.data.tolist()}


# -- settings --------------------------------------------------------------


def read_config_file(path) -> dict:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _SETTINGS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _coerce(key, value):
    typ = _SETTINGS[key][0]
    try:
        return typ(value)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for {key}: {value!r}") from None


def resolve_settings(command: str, flags: dict, config_path=None) -> dict:
    allowed = _COMMAND_SETTINGS[command]
    settings = {k: _SETTINGS[k][1] for k in allowed}
    settings.update({k: v for k, v in _PRESET_OVERRIDES.get(command, {}).items() if k in allowed})
    if config_path is not None:
        for k, v in read_config_file(config_path).items():
            if k in allowed:
                settings[k] = _coerce(k, v)
    for k in allowed:
        if flags.get(k) is not None:
            settings[k] = flags[k]
    if "format" in settings and settings["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {settings['format']!r}")
    return settings


def parse_mode(text: str) -> tuple[Mode, float]:
    if text == "antiphase":
        return Mode.ANTIPHASE, 0.0
    if text == "psi-zero":
        return Mode.PSI_ZERO, 0.0
    if text.startswith("psi="):
        try:
            psi = float(text[4:])
        except ValueError:
            raise UsageError(f"invalid psi in mode {text!r}") from None
        if not math.isfinite(psi):
            raise UsageError("psi must be finite")
        return Mode.INDEPENDENT, psi
    raise UsageError(f"mode must be antiphase, psi-zero or psi=<value>, got {text!r}")


def _cavity_params(s: dict, **over) -> cavity.CavityParams:
    kw = {k: s[k] for k in ("r", "delta", "max_order", "epsilon") if k in s}
    kw.update(over)
    return cavity.CavityParams(**kw)


# -- output ----------------------------------------------------------------


class Output:
    """Writes artifacts into one directory, or a single table to an explicit path."""

    def __init__(self, out_dir: Path, out: str | None = None):
        self.out_dir = out_dir
        self.out = out
        self.written: list[str] = []

    def _path(self, name: str) -> Path:
        return self.out_dir / name

    def write(self, path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.written.append(str(path))

    def emit(self, stem: str, text: str, suffix: str) -> None:
        """Write the command's main artifact, honouring ``--out``."""
        if self.out == "-":
            sys.stdout.write(text)
            return
        path = Path(self.out) if self.out else self._path(stem + suffix)
        self.write(path, text)

    def sidecar(self, stem: str, text: str) -> None:
        if self.out == "-":
            return
        base = Path(self.out).with_suffix("") if self.out else self._path(stem)
        self.write(base.with_name(base.name + ".json"), text)


def _report_or_error(table: SweepTable, column="i_a", baseline=0.0) -> tuple[dict, str | None]:
    try:
        return {"report": analysis.enhancement_report(table, column, baseline).to_dict()}, None
    except UnresolvedError as exc:
        return {"report": None, "analysis_error": str(exc)}, str(exc)


# -- commands --------------------------------------------------------------


def _emit_table(out: Output, stem: str, config: dict, table: SweepTable, results: dict, fmt: str):
    if fmt == "csv":
        out.emit(stem, table_to_csv(table), ".csv")
        out.sidecar(stem, json_document(config, results))
    else:
        out.emit(stem, json_document(config, {**results, "table": table_results(table)}), ".json")


def cmd_sweep_interferometer(system: System, stem: str, s: dict, out: Output) -> int:
    mode, psi = parse_mode(s["mode"])
    table = interferometer.sweep_1d(system, mode, SweepGrid(s["start"], s["end"], s["steps"]), psi)
    results, err = _report_or_error(table)
    results["meta"] = table.meta
    _emit_table(out, stem, {"command": stem, **s}, table, results, s["format"])
    return EXIT_NUMERIC if err else EXIT_OK


def cmd_sweep_cavity(s: dict, out: Output) -> int:
    table = cavity.intensity_sweep(SweepGrid(s["start"], s["end"], s["steps"]), _cavity_params(s))
    results, err = _report_or_error(table)
    results["meta"] = table.meta
    _emit_table(out, "sweep-cavity", {"command": "sweep-cavity", **s}, table, results, s["format"])
    return EXIT_NUMERIC if err else EXIT_OK


def cmd_sagnac(s: dict, out: Output) -> int:
    g = sagnac.SagnacGeometry(s["area"], s["wavelength"], s["rotation_rate"])
    n_eff = cavity.effective_order(_cavity_params(s))
    resolution = s["phase_resolution"]
    if resolution is None:
        resolution = sagnac.pbsi_resolution(sagnac.CLASSICAL_RESOLUTION, n_eff)
    results = {
        "delta_t": sagnac.sagnac_time_delay(g),
        "delta_phi": sagnac.sagnac_phase(g),
        "per_arm_phi": sagnac.per_arm_phase(g),
        "n_eff": n_eff,
        "phase_resolution": resolution,
        "min_detectable_rotation": sagnac.min_detectable_rotation(g, resolution),
        "classical_min_detectable_rotation": sagnac.min_detectable_rotation(
            g, sagnac.CLASSICAL_RESOLUTION
        ),
    }
    out.emit("sagnac", json_document({"command": "sagnac", **s}, results), ".json")
    return EXIT_OK


def cmd_analyze(s: dict, input_path: str, out: Output) -> int:
    table = read_csv_table(input_path)
    if s["column"] not in table:
        raise UsageError(f"column {s['column']!r} not in {list(table.columns)}")
    report = analysis.enhancement_report(table, s["column"], s["baseline"])
    out.emit("analyze", json_document({"command": "analyze", **s}, {"report": report.to_dict()}), ".json")
    return EXIT_OK


def _period_or_none(phi, y):
    try:
        return analysis.modulation_period(phi, y)
    except UnresolvedError:
        return None


def _interferometer_figure(system: System, stem: str, s: dict, out: Output) -> int:
    steps = s["steps"]
    grid = SweepGrid(-TWO_PI, TWO_PI, steps)
    plane = SweepGrid(-TWO_PI, TWO_PI, 201)
    i_map = interferometer.sweep_2d(system, plane, plane)
    phi, psi = np.meshgrid(plane.values(), plane.values(), indexing="ij")
    surface = SweepTable.from_columns(phi=phi.ravel(), psi=psi.ravel(), i_upper=i_map.ravel())
    out.write(out._path(f"{stem}a.csv"), table_to_csv(surface))

    results = {}
    status = EXIT_OK
    for panel, mode in (("b", Mode.ANTIPHASE), ("c", Mode.PSI_ZERO)):
        table = interferometer.sweep_1d(system, mode, grid)
        out.write(out._path(f"{stem}{panel}.csv"), table_to_csv(table))
        res, err = _report_or_error(table)
        res["mode"] = mode.value
        res["intensity_period"] = _period_or_none(table.x, table["i_a"])
        res["g2_period"] = _period_or_none(table.x, table["g2"])
        results[panel] = res
        status = EXIT_NUMERIC if err else status
    config = {"command": stem, "steps": steps, "system": system.value}
    out.write(out._path(f"{stem}.json"), json_document(config, results))
    return status


def _window(params: cavity.CavityParams) -> SweepGrid:
    half = 5 * (1 - params.r) + 5 * cavity.fwhm_estimate(params)
    return SweepGrid(HALF_PI - half, HALF_PI + half, 4001)


def _fig4_panel(panel: str, s: dict) -> tuple[SweepTable, dict]:
    params = _cavity_params(s)
    if panel in "bd":
        orders = (1, 2, 3) if panel == "b" else (1, 10, 100)
        phi = SweepGrid(0.0, math.pi, 2001 if panel == "b" else 20001).values()
        cols = {"phi": phi}
        for n in orders:
            cols[f"e_a_{n}"] = np.real(cavity.ordered_field_curves(n, phi, params)[0])
        return SweepTable.from_columns(**cols), {"orders": list(orders)}
    if panel == "c":
        n_eff = cavity.effective_order(params)
        fields = [cavity.ordered_field(n, HALF_PI, params) for n in range(1, n_eff + 1)]
        table = SweepTable.from_columns(
            order=np.arange(1, n_eff + 1),
            e_a=[f.e_a.real for f in fields],
            e_b=[f.e_b.real for f in fields],
        )
        return table, {"phi": HALF_PI, "n_eff": n_eff}
    if panel == "e":
        grid = _window(params)
        e_a, e_b = cavity.amplitude_sum_curves(grid.values(), params)
        table = SweepTable.from_columns(phi=grid.values(), e_a=np.real(e_a), e_b=np.real(e_b))
        return table, {"n_eff": cavity.effective_order(params)}
    if panel == "h":
        params = _cavity_params(s, r=0.9, max_order=50)
    grid = _window(params) if panel in "fh" else SweepGrid(0.0, math.pi, 20001)
    table = cavity.intensity_sweep(grid, params)
    extra = {"meta": table.meta, "analytic_converged_peak": cavity.analytic_peak_intensity(params.r)}
    if panel in "fh":
        report = analysis.enhancement_report(table)
        extra["report"] = report.to_dict()
        extra["peak_intensity"] = max(h for _, h in report.peaks)
    else:
        extra["max_intensity"] = float(np.max(table["i_a"]))
    return table, extra


def cmd_fig4(s: dict, panel: str | None, out: Output) -> int:
    panels = panel or FIG4_PANELS
    results = {}
    for p in panels:
        table, extra = _fig4_panel(p, s)
        out.write(out._path(f"fig4{p}.csv"), table_to_csv(table))
        results[p] = extra
    stem = f"fig4_{panel}" if panel else "fig4"
    config = {"command": "fig4", "panel": panel or "all", **s}
    out.write(out._path(f"{stem}.json"), json_document(config, results))
    return EXIT_OK


# -- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pbsi", description="Coherence de Broglie Sagnac interferometer simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, single_output=True):
        p.add_argument("--config", help="flat key=value settings file")
        p.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_DIR_ENV} or cwd)")
        if single_output:
            p.add_argument("--out", help="explicit output path, or - for stdout")

    def grid(p):
        p.add_argument("--start", type=float)
        p.add_argument("--end", type=float)
        p.add_argument("--steps", type=int)

    def cav(p):
        p.add_argument("--r", type=float, help="mirror amplitude reflectance")
        p.add_argument("--delta", type=float, help="round-trip phase (rad)")
        p.add_argument("--max-order", type=int)
        p.add_argument("--epsilon", type=float)

    def fmt(p):
        p.add_argument("--format", choices=("csv", "json"))

    for name in ("sweep-mzi", "sweep-ccd"):
        p = sub.add_parser(name, help=f"1-D {'block D' if name == 'sweep-mzi' else 'CCD-MZI'} sweep")
        common(p)
        grid(p)
        fmt(p)
        p.add_argument("--mode", help="antiphase | psi-zero | psi=<value>")

    p = sub.add_parser("sweep-cavity", help="cavity output intensity sweep")
    common(p)
    grid(p)
    cav(p)
    fmt(p)

    p = sub.add_parser("sagnac", help="Sagnac delay, phase and rate sensitivity")
    common(p)
    p.add_argument("--area", type=float, help="loop area (m^2)")
    p.add_argument("--wavelength", type=float, help="optical wavelength (m)")
    p.add_argument("--rotation-rate", type=float, help="rotation rate (rad/s)")
    p.add_argument("--phase-resolution", type=float, help="rad; default is the cavity-enhanced limit")
    cav(p)

    p = sub.add_parser("analyze", help="fringe report for a sweep CSV")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--column")
    p.add_argument("--baseline", type=float)

    for name in ("fig2", "fig3"):
        p = sub.add_parser(name, help=f"reproduce the {name} sweeps")
        common(p, single_output=False)
        p.add_argument("--steps", type=int)

    p = sub.add_parser("fig4", help="reproduce the cavity panels")
    common(p, single_output=False)
    cav(p)
    p.add_argument("--panel", choices=tuple(FIG4_PANELS))
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items()}
    settings = resolve_settings(args.command, flags, args.config)
    out_dir = Path(args.out_dir or os.environ.get(OUTPUT_DIR_ENV) or ".")
    out = Output(out_dir, getattr(args, "out", None))

    if args.command == "sweep-mzi":
        status = cmd_sweep_interferometer(System.BLOCK_D, "sweep-mzi", settings, out)
    elif args.command == "sweep-ccd":
        status = cmd_sweep_interferometer(System.CCD, "sweep-ccd", settings, out)
    elif args.command == "sweep-cavity":
        status = cmd_sweep_cavity(settings, out)
    elif args.command == "sagnac":
        status = cmd_sagnac(settings, out)
    elif args.command == "analyze":
        status = cmd_analyze(settings, args.input, out)
    elif args.command == "fig2":
        status = _interferometer_figure(System.BLOCK_D, "fig2", settings, out)
    elif args.command == "fig3":
        status = _interferometer_figure(System.CCD, "fig3", settings, out)
    else:
        status = cmd_fig4(settings, args.panel, out)
    for path in out.written:
        print(path)
    return status


def main(argv=None) -> int:
    try:
        return run(argv)
    except (UsageError, DomainError) as exc:
        print(f"pbsi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnresolvedError, FloatingPointError) as exc:
        print(f"pbsi: analysis failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
