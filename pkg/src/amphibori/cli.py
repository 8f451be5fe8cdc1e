"""Command-line front end.

Subcommands: pattern, simulate, sweep, calibrate, serve.
Exit codes: 0 success, 1 I/O, 2 validation/parse, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ENV_VAR, load_config
from .errors import AmphiboriError, ScenarioParseError, SimulationAbort

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="amphibori",
        description="Desk-scale simulator for magnetically actuated origami millirobots",
    )
    p.add_argument("--config", help=f"JSON config path (or ${ENV_VAR})")
    p.add_argument("--seed", type=int, default=0, help="run seed recorded in reports")
    p.add_argument("--jobs", type=int, default=1, help="worker pool size for sweeps")
    p.add_argument("--out-dir", default=".", help="output directory")
    sub = p.add_subparsers(dest="command", required=True)

    pat = sub.add_parser("pattern", help="export the flat crease pattern / folded mesh")
    pat.add_argument("--n", type=int, default=6)
    pat.add_argument("--diameter-mm", type=float, default=7.8)
    pat.add_argument("--height-mm", type=float, default=6.8)
    pat.add_argument("--plain", action="store_true", help="no hole and cuts")
    pat.add_argument("--out", required=True, help="SVG output path")
    pat.add_argument("--stl", help="also export the folded mesh as ASCII STL")
    pat.add_argument("--fold", type=float, default=0.0, help="fold fraction for the STL")

    sim = sub.add_parser("simulate", help="run a scenario file")
    sim.add_argument("scenario", help="scenario DSL file")
    sim.add_argument("--plot", action="store_true", help="emit a trajectory SVG")
    sim.add_argument("--mission", action="store_true",
                     help="run the built-in cargo mission preset instead of a schedule")

    sw = sub.add_parser("sweep", help="parameter sweeps with plots")
    sw.add_argument("kind", choices=("swim_freq", "jump_angle"))
    sw.add_argument("--from", dest="lo", type=float, required=True)
    sw.add_argument("--to", dest="hi", type=float, required=True)
    sw.add_argument("--steps", type=int, default=8)

    cal = sub.add_parser("calibrate", help="fit model coefficients to data")
    cal.add_argument("target", choices=("swim", "jump"))
    cal.add_argument("--data", help="CSV input (swim: variant,f_hz,v_mm_s)")
    cal.add_argument("--height-mm", type=float, default=23.5)
    cal.add_argument("--distance-mm", type=float, default=56.2)
    cal.add_argument("--out", help="coefficients JSON output path")

    srv = sub.add_parser("serve", help="teleoperation server")
    srv.add_argument("scenario", help="scenario DSL file (schedule ignored)")
    srv.add_argument("--port", type=int, default=8355)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--time-scale", type=float, default=1.0)
    srv.add_argument("--static", help="directory of console assets to serve at /")
    return p


def cmd_pattern(args) -> int:
    from .geometry import build_pattern, export_flat_pattern, export_stl, fold_configuration

    try:
        pattern = build_pattern(args.n, args.diameter_mm * 1e-3, args.height_mm * 1e-3,
                                hole_and_cuts=not args.plain)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        export_flat_pattern(pattern, args.out)
        print(f"wrote {args.out}")
        if args.stl:
            export_stl(fold_configuration(pattern, args.fold), args.stl)
            print(f"wrote {args.stl}")
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _write_report(report: dict, out_dir: Path) -> Path:
    path = out_dir / "report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path


def cmd_simulate(args) -> int:
    from .scenario.dsl import parse_scenario
    from .scenario.mission import run_mission
    from .scenario.run import run_scenario

    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    started = time.perf_counter()
    try:
        if args.mission:
            report_obj = run_mission(seed=args.seed)
            trace = report_obj.trace
            extra = {"mission_events": report_obj.events, "completed": report_obj.completed}
        else:
            scenario = parse_scenario(text)
            trace = run_scenario(scenario)
            extra = {}
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SimulationAbort as exc:
        print(f"dynamics abort: {exc}", file=sys.stderr)
        if exc.partial_trace is not None:
            exc.partial_trace.to_csv(out_dir / "trace_partial.csv")
            print(f"partial trace written to {out_dir / 'trace_partial.csv'}", file=sys.stderr)
        return EXIT_NUMERICAL
    except AmphiboriError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    stem = Path(args.scenario).stem
    trace_path = out_dir / f"{stem}_trace.csv"
    events_path = out_dir / f"{stem}_events.jsonl"
    trace.to_csv(trace_path)
    trace.events_to_jsonl(events_path)
    report = {
        "scenario": stem,
        "seed": args.seed,
        "trace": str(trace_path),
        "events_file": str(events_path),
        "wall_time_s": round(time.perf_counter() - started, 3),
        **trace.summary(),
        **extra,
    }
    if args.plot:
        from .plotsvg import trajectory_plot

        plot_path = out_dir / f"{stem}_trajectory.svg"
        trajectory_plot(trace, plot_path, title=stem)
        report["plot"] = str(plot_path)
    path = _write_report(report, out_dir)
    labels = []
    for e in trace.events:
        if e.event == "mode":
            labels.append(e.detail.get("mode", "mode"))
        elif e.event not in ("segment", "end"):
            labels.append(e.event)
    print(f"{stem}: {len(trace.samples)} samples, events: {' -> '.join(labels) or 'none'}")
    print(f"report: {path}")
    return EXIT_OK


def _swim_point(args_tuple):
    variant, freq = args_tuple
    from .engine.swim import default_body, measure_swim_speed

    return measure_swim_speed(default_body(variant), freq)


def _jump_point(args_tuple):
    (theta_deg,) = args_tuple
    from .engine.jump import jump
    from .engine.rigid import ContactParams, make_body
    from .geometry import default_robot_pattern

    body = make_body(default_robot_pattern())
    r = jump(body, 40e-3, math.radians(theta_deg), pulse_duration=2.2e-3,
             contact=ContactParams(k_n=150.0, mu=1.0))
    return r.apex_height, r.distance


def cmd_sweep(args) -> int:
    from .plotsvg import line_plot

    if args.steps < 1 or args.hi < args.lo:
        print("error: empty sweep range", file=sys.stderr)
        return EXIT_VALIDATION
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    xs = [args.lo + (args.hi - args.lo) * k / max(args.steps - 1, 1) for k in range(args.steps)]

    def fan_out(fn, jobs_args):
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                return list(ex.map(fn, jobs_args))
        return [fn(a) for a in jobs_args]

    if args.kind == "swim_freq":
        series = {}
        for variant in ("plain", "hole_cuts"):
            speeds = fan_out(_swim_point, [(variant, f) for f in xs])
            csv_path = out_dir / f"sweep_swim_freq_{variant}.csv"
            with open(csv_path, "w", encoding="utf-8") as fh:
                fh.write("f_hz,v_mm_s\n")
                for f, v in zip(xs, speeds):
                    fh.write(f"{f:.9g},{v * 1e3:.9g}\n")
            series[variant] = (xs, [v * 1e3 for v in speeds])
            print(f"wrote {csv_path}")
        plot_path = out_dir / "sweep_swim_freq.svg"
        line_plot(series, plot_path, xlabel="field frequency [Hz]",
                  ylabel="steady speed [mm/s]", title="swimming speed vs spin frequency")
        print(f"wrote {plot_path}")
    else:
        results = fan_out(_jump_point, [(t,) for t in xs])
        csv_path = out_dir / "sweep_jump_angle.csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("theta_deg,height_mm,distance_mm\n")
            for t, (h, d) in zip(xs, results):
                fh.write(f"{t:.9g},{h * 1e3:.9g},{d * 1e3:.9g}\n")
        print(f"wrote {csv_path}")
        plot_path = out_dir / "sweep_jump_angle.svg"
        line_plot(
            {"apex height": (xs, [h * 1e3 for h, _ in results]),
             "distance": (xs, [d * 1e3 for _, d in results])},
            plot_path, xlabel="field angle [deg]", ylabel="[mm]",
            title="jump performance vs pulse angle",
        )
        print(f"wrote {plot_path}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = Path(args.out) if args.out else out_dir / f"calibration_{args.target}.json"

    if args.target == "swim":
        from .hydro import DEFAULT_CALIBRATION_POINTS, calibrate_swim, terminal_speed

        points = {k: list(v) for k, v in DEFAULT_CALIBRATION_POINTS.items()}
        if args.data:
            try:
                points = {}
                with open(args.data, encoding="utf-8") as fh:
                    header = fh.readline().strip().split(",")
                    if header != ["variant", "f_hz", "v_mm_s"]:
                        print(f"error: expected columns variant,f_hz,v_mm_s, got {header}",
                              file=sys.stderr)
                        return EXIT_VALIDATION
                    for line in fh:
                        variant, f_hz, v_mm_s = line.strip().split(",")
                        points.setdefault(variant, []).append((float(f_hz), float(v_mm_s) * 1e-3))
            except OSError as exc:
                print(f"I/O error: {exc}", file=sys.stderr)
                return EXIT_IO
            except ValueError as exc:
                print(f"error: bad data file: {exc}", file=sys.stderr)
                return EXIT_VALIDATION
        try:
            coeffs = calibrate_swim(points, diameter=7.8e-3)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        payload = {
            variant: {
                "c_thrust": c.c_thrust,
                "c_drag": c.c_drag,
                "c_spin": c.c_spin,
                "residuals": [
                    {"f_hz": f, "v_model_mm_s": terminal_speed(c, f, 7.8e-3) * 1e3,
                     "v_data_mm_s": v * 1e3}
                    for f, v in points[variant]
                ],
            }
            for variant, c in coeffs.items()
        }
        out_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"wrote {out_path}")
        return EXIT_OK

    from .engine.jump import calibrate_jump
    from .engine.rigid import make_body
    from .geometry import default_robot_pattern

    body = make_body(default_robot_pattern())
    cal = calibrate_jump(body, args.height_mm * 1e-3, args.distance_mm * 1e-3)
    out_path.write_text(json.dumps(cal.to_dict(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {out_path}")
    if not cal.converged:
        print(f"calibration failed: residual {cal.residual:.3f} above threshold; "
              f"best-found parameters written", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_serve(args) -> int:
    from .teleop import serve

    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        serve(text, host=args.host, port=args.port, time_scale=args.time_scale,
              static_dir=args.static)
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"startup error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION if isinstance(exc, ValueError) else EXIT_IO
    handler = {
        "pattern": cmd_pattern,
        "simulate": cmd_simulate,
        "sweep": cmd_sweep,
        "calibrate": cmd_calibrate,
        "serve": cmd_serve,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
