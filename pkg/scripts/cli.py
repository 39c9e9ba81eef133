# scripts/cli.py
"""bscope: command-line front end for the orbit index pipeline.

Progress goes to stderr; stdout (or --out) carries the JSON report.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from beltrami_scope import boundary
from beltrami_scope.config import BSCOPE_LOG_LEVEL
from beltrami_scope.disc_index import compute_index, compute_slk, index_value, lambda_sign
from beltrami_scope.errors import (
    EXIT_NOT_BELTRAMI,
    EXIT_NOT_INVARIANT,
    EXIT_OK,
    BeltramiScopeError,
    ConfigError,
    OracleUnavailableError,
)
from beltrami_scope.fields import beltrami_residuals, sample_points
from beltrami_scope.geometry import MeridionalDisc
from beltrami_scope.verify import calibrate, cross_validate, find_closed_orbits, orbit_seeds, slk_pushoff_oracle
from scripts.config import (
    BUILTIN_FIELDS,
    RunConfig,
    build_chart,
    build_disc,
    build_field,
    build_metric,
    is_disc_fixture,
    load_config,
    parse_config,
)
from scripts.grid_format import export_grid, read_header
from scripts.render import render_disc
from scripts.report import ReportDocument, write_report

COMMANDS = ("index", "slk", "check-beltrami", "boundary", "orbits", "render", "calibrate", "export-grid", "schema")


def _say(message: str) -> None:
    print(message, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bscope",
        description="Contractible-orbit index of a Beltrami field on a solid torus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in COMMANDS:
        cmd = sub.add_parser(name)
        if name == "schema":
            continue
        cmd.add_argument("--out", help="Write the JSON report here instead of stdout.")
        cmd.add_argument("--no-timestamp", action="store_true", help="Leave created_at empty.")
        if name == "calibrate":
            cmd.add_argument("--resolutions", type=int, nargs="+", default=[128, 256])
            continue
        source = cmd.add_argument_group("field")
        source.add_argument("--config", help="JSON run config; replaces the field and numerics flags.")
        source.add_argument("--builtin", choices=BUILTIN_FIELDS)
        source.add_argument("--scale", type=float, default=1.0, help="Lundquist wavenumber.")
        source.add_argument("--grid", help="Sampled field in .bsg format.")
        source.add_argument("--R", type=float, dest="R")
        source.add_argument("--L", type=float, dest="L")
        source.add_argument("--metric-factor", type=float, help="Use the scaled metric c^2 * delta.")
        source.add_argument("--z0", type=float, default=0.0)
        source.add_argument("--bump", type=float, default=0.0)
        source.add_argument("--tilt", type=float, default=0.0)
        source.add_argument("--resolution", type=int, help="Disc scan resolution.")
        source.add_argument("--assume-lambda-sign", type=int, choices=(-1, 0, 1))
        source.add_argument("--allow-nontransverse", action="store_true", help="Keep the disc as oriented.")
        source.add_argument("--no-oracle", action="store_true")
        source.add_argument("--no-orbits", action="store_true")
        if name == "render":
            cmd.add_argument("--render-out", help="SVG destination; stdout when omitted.")
        if name == "export-grid":
            cmd.add_argument("--shape", type=int, nargs=3, default=[64, 64, 64], metavar=("N_R", "N_THETA", "N_Z"))
            cmd.add_argument("--grid-out", required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        if args.builtin or args.grid:
            raise ConfigError("--config cannot be combined with --builtin or --grid.")
        return load_config(args.config)
    if bool(args.builtin) == bool(args.grid):
        raise ConfigError("Give exactly one of --builtin, --grid or --config.")

    document: dict = {"chart": {}, "disc": {"z0": args.z0, "bump": args.bump, "tilt": args.tilt}}
    if args.builtin:
        document["field"] = {"kind": "builtin", "name": args.builtin, "scale": args.scale}
    else:
        header = read_header(args.grid)
        document["field"] = {"kind": "grid", "path": args.grid}
        document["chart"] = {"R": header["R"], "L": header["L"]}
    if args.R is not None:
        document["chart"]["R"] = args.R
    if args.L is not None:
        document["chart"]["L"] = args.L
    if args.metric_factor is not None:
        document["metric"] = {"kind": "conformal", "factor": args.metric_factor}
    if args.resolution is not None:
        document["numerics"] = {"resolution": args.resolution}
    if args.assume_lambda_sign is not None:
        document["assume_lambda_sign"] = args.assume_lambda_sign
    elif args.builtin == "figure-five":
        document["assume_lambda_sign"] = 1
    document["require_transverse"] = not args.allow_nontransverse
    document["oracle"] = not args.no_oracle
    document["orbits"] = not args.no_orbits
    return parse_config(document)


# --- Commands ---


def _run_oracle(doc: ReportDocument, field, disc, g, computed_slk: int | None) -> None:
    try:
        doc.oracle = slk_pushoff_oracle(field, disc, g)
    except OracleUnavailableError as e:
        _say(f"⚠️ Linking oracle unavailable: {e}")
        doc.notes.append(f"oracle unavailable: {e}")
        return
    if computed_slk is not None and doc.oracle.slk != computed_slk:
        _say(f"⚠️ Oracle slk {doc.oracle.slk} disagrees with the disc count {computed_slk}.")
        doc.notes.append("oracle disagrees with the disc count")
    else:
        _say(f"✅ Linking oracle agrees: slk = {doc.oracle.slk}")


def run_index(config: RunConfig, doc: ReportDocument) -> int:
    chart = build_chart(config)
    field = build_field(config.field, chart)
    g, mu = build_metric(config)
    disc = build_disc(config, chart)
    numerics = config.numerics

    _say(f"🔍 Computing the index of {field.describe()['kind']} on R={chart.R:g}, L={chart.L:g}...")
    report = compute_index(
        field,
        g,
        mu,
        chart,
        disc,
        resolution=numerics.resolution,
        winding_samples=numerics.winding_samples,
        boundary_grid=numerics.boundary_grid,
        curl_tol=numerics.curl_tol,
        div_tol=numerics.div_tol,
        assume_lambda_sign=config.assume_lambda_sign,
    )
    doc.index = report
    for warning in report.warnings:
        _say(f"⚠️ {warning}")
    _say(f"   Boundary: {report.boundary.kind}, branch: {report.branch}")

    if config.oracle and report.slk is not None:
        if report.disc.get("lifted"):
            doc.notes.append("oracle skipped on a lifted witness disc")
        else:
            used = MeridionalDisc(
                chart, z0=float(report.disc["z0"]), bump=float(report.disc["bump"]), tilt=float(report.disc["tilt"])
            )
            _run_oracle(doc, field, used, g, report.slk.slk)

    if report.verdict is None:
        _say("❌ Field failed the Beltrami check; verdict withheld.")
        return EXIT_NOT_BELTRAMI

    if config.orbits and not is_disc_fixture(config.field):
        _say("🔍 Hunting for a contractible closed orbit...")
        doc.cross_validation = cross_validate(report, field, chart, orbit_seeds(chart, numerics.orbit_seeds))
        _say(f"   Cross-validation: {doc.cross_validation.status}")
    _say(f"✅ Index = {report.index} ({report.verdict})")
    return EXIT_OK


def run_slk(config: RunConfig, doc: ReportDocument) -> int:
    chart = build_chart(config)
    field = build_field(config.field, chart)
    g, _ = build_metric(config)
    disc = build_disc(config, chart)
    _say("🔍 Scanning the disc for rest points of X_D...")
    doc.slk = compute_slk(
        field,
        disc,
        g,
        config.numerics.resolution,
        config.numerics.winding_samples,
        require_transverse=config.require_transverse,
    )
    _say(f"✅ slk = {doc.slk.slk} from {len(doc.slk.records)} rest points")
    if config.oracle and config.require_transverse:
        _run_oracle(doc, field, disc, g, doc.slk.slk)
    return EXIT_OK


def run_check_beltrami(config: RunConfig, doc: ReportDocument) -> int:
    chart = build_chart(config)
    field = build_field(config.field, chart)
    g, mu = build_metric(config)
    doc.beltrami = beltrami_residuals(
        field, g, mu, sample_points(chart), chart, config.numerics.curl_tol, config.numerics.div_tol
    )
    b = doc.beltrami
    _say(f"   lambda = {b.lambda_estimate:.8g}, curl residual {b.curl_residual:.3g}, div residual {b.div_residual:.3g}")
    if not b.passed:
        _say("❌ Not a Beltrami field within tolerance.")
        return EXIT_NOT_BELTRAMI
    _say("✅ Beltrami check passed.")
    return EXIT_OK


def run_boundary(config: RunConfig, doc: ReportDocument) -> int:
    chart = build_chart(config)
    field = build_field(config.field, chart)
    g, _ = build_metric(config)
    invariance = boundary.check_invariance(field, g, chart)
    if not invariance.passed:
        _say(f"❌ Field is not tangent to the boundary (max radial share {invariance.max_radial:.3g}).")
        return EXIT_NOT_INVARIANT
    grid = config.numerics.boundary_grid
    doc.boundary = boundary.classify_boundary(boundary.boundary_foliation(field, g, chart, (grid, grid)))
    _say(f"✅ Boundary foliation: {doc.boundary.kind}")
    return EXIT_OK


def run_orbits(config: RunConfig, doc: ReportDocument) -> int:
    chart = build_chart(config)
    field = build_field(config.field, chart)
    _say(f"🔍 Return-map search from {config.numerics.orbit_seeds} seeds...")
    doc.orbits = find_closed_orbits(field, chart, orbit_seeds(chart, config.numerics.orbit_seeds))
    contractible = sum(o.contractible for o in doc.orbits)
    _say(f"✅ {len(doc.orbits)} closed orbits, {contractible} contractible")
    return EXIT_OK


def run_render(config: RunConfig, doc: ReportDocument, render_out: str | None) -> int:
    run_slk(config.model_copy(update={"oracle": False}), doc)
    chart = build_chart(config)
    field = build_field(config.field, chart)
    g, mu = build_metric(config)
    sign = config.assume_lambda_sign
    if sign is None:
        check = beltrami_residuals(field, g, mu, sample_points(chart), chart)
        sign = lambda_sign(check.lambda_estimate, chart) if check.passed else None
    index = None if sign is None else index_value(sign, doc.slk.slk, True)
    svg = render_disc(field, build_disc(config, chart), g, doc.slk, index)
    if render_out:
        Path(render_out).write_text(svg)
        _say(f"✅ Foliation written to {render_out}")
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def run_export(config: RunConfig, shape: list[int], grid_out: str) -> int:
    chart = build_chart(config)
    field = build_field(config.field, chart)
    if not field.analytic:
        raise ConfigError("export-grid needs an analytic field; the input is already sampled.")
    path = export_grid(field, chart, tuple(shape), grid_out)
    _say(f"✅ Wrote {shape[0]}x{shape[1]}x{shape[2]} grid to {path}")
    return EXIT_OK


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "schema":
        print(json.dumps(RunConfig.model_json_schema(), indent=2))
        return EXIT_OK

    if args.command == "calibrate":
        config = parse_config({"field": {"kind": "builtin", "name": "lundquist"}})
        doc = ReportDocument(command="calibrate", config=config)
        _say("🔍 Calibrating on the Lundquist field at R = 1...")
        doc.calibration = calibrate(tuple(args.resolutions))
        status = "stable" if doc.calibration.stable else "UNSTABLE"
        _say(f"✅ s* = {doc.calibration.s_star} ({status})")
        code = EXIT_OK
    else:
        config = config_from_args(args)
        if args.command == "export-grid":
            return run_export(config, args.shape, args.grid_out)
        doc = ReportDocument(command=args.command, config=config)
        if args.command == "index":
            code = run_index(config, doc)
        elif args.command == "slk":
            code = run_slk(config, doc)
        elif args.command == "check-beltrami":
            code = run_check_beltrami(config, doc)
        elif args.command == "boundary":
            code = run_boundary(config, doc)
        elif args.command == "orbits":
            code = run_orbits(config, doc)
        else:
            code = run_render(config, doc, args.render_out)
            if not args.render_out:
                return code

    if not args.no_timestamp:
        doc = doc.stamp()
    text = write_report(doc, args.out)
    if args.out is None:
        print(text)
    return code


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=BSCOPE_LOG_LEVEL, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except BeltramiScopeError as e:
        _say(f"❌ {type(e).__name__}: {e}")
        for key, value in e.diagnostics.items():
            _say(f"   {key}: {value}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
