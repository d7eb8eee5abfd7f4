"""Command-line front end.

Subcommands: ``design`` (one beamformer, JSON diagnostics), ``pattern``
(beampattern CSV + lobe report), ``sweep`` (performance vs kr),
``table1`` (cost-function comparison table), ``pwd`` (plane-wave
decomposition maps), ``layout-gen`` (sampling layouts) and ``reproduce``
(one-shot report bundles).  Angles are degrees on the command line and
in all delimited output; radians internally.

Exit codes: 0 success, 1 usage or computation error, 2 infeasible
sensitivity constraint.  Reports are deterministic: identical
configuration (and seed) yields byte-identical CSV/JSON; each report
also renders a companion PNG figure unless ``--no-plot`` is given.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, design, plotting, pwd
from .cmatrix import CostFunction, c_linear, c_numeric, c_spherical, u_matrix
from .errors import BeamformerError, InfeasibleSensitivityError
from .geometry import (
    Direction,
    LinearArray,
    OpenArray,
    SphericalArray,
    SphericalLayout,
)

COSTS = ("sin", "linear", "uniform", "step")
_REPRODUCE_TARGETS = (
    "linear-md",
    "sphere-md",
    "sphere-costs",
    "kr-sweep",
    "cost-table",
    "pwd-demo",
    "all",
)


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1 (argparse defaults to 2, reserved here for
    # infeasible constraints)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.10g}" if isinstance(x, float) else str(x)


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list, rows: list):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _meta(args) -> dict:
    # hash the computational configuration only: output paths and
    # presentation flags must not change report contents
    skip = ("func", "out", "quiet", "no_plot")
    config = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    blob = json.dumps(config, sort_keys=True, default=str)
    return {
        "version": __version__,
        "config_hash": hashlib.sha256(blob.encode()).hexdigest()[:16],
    }


def _say(args, message: str):
    if not args.quiet:
        print(message)


def _outdir(args, *sub) -> Path:
    path = Path(args.out).joinpath(*sub)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cost_from_args(args) -> CostFunction:
    return CostFunction.from_name(
        args.cost,
        theta0=math.radians(args.step_theta0) if args.cost == "step" else None,
        floor=args.step_floor if args.cost == "step" else None,
    )


def _load_open_array(path) -> OpenArray:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    allowed = {"positions", "f_hz", "c"}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown array-file fields: {sorted(unknown)}")
    if "positions" not in data or "f_hz" not in data:
        raise ValueError("array file needs 'positions' and 'f_hz'")
    kwargs = {"speed_of_sound": float(data["c"])} if "c" in data else {}
    return OpenArray(
        positions=np.asarray(data["positions"], dtype=float),
        frequency=float(data["f_hz"]),
        **kwargs,
    )


def _build_problem(args):
    """Model, look manifold, design C, sin-cost C, metric, domain, look."""
    cost = _cost_from_args(args)
    if args.look_deg is not None and len(args.look_deg) > 2:
        raise ValueError("--look-deg takes THETA or THETA PHI")
    if args.array == "linear":
        if args.m is None or args.d is None or args.f is None or args.look_deg is None:
            raise ValueError("linear arrays need --m, --d, --f and --look-deg")
        model = LinearArray(num_mics=args.m, spacing=args.d, frequency=args.f)
        look = math.radians(args.look_deg[0])
        b = model.manifold(look)
        c_sin = c_linear(model.num_mics, model.spacing, model.wavelength)
        c_design = c_sin if cost.kind == "sin" else c_numeric(model, cost)
        return model, b, c_design, c_sin, None, "spatial", look
    if args.array == "spherical":
        if args.n is None:
            raise ValueError("spherical arrays need --n")
        if args.kr is not None:
            model = SphericalArray(order=args.n, kr=args.kr)
        elif args.r is not None and args.f is not None:
            model = SphericalArray.from_physical(args.n, args.r, args.f)
        else:
            raise ValueError("spherical arrays need --kr or both --r and --f")
        b = model.look_manifold()
        c_sin = c_spherical(model.order, model.kr)
        c_design = c_sin if cost.kind == "sin" else c_spherical(model.order, model.kr, cost)
        m_mics = args.m_mics if args.m_mics else (model.order + 1) ** 2
        metric = u_matrix(model.order, m_mics)
        look = (
            Direction.from_degrees(*args.look_deg)
            if args.look_deg is not None
            else None
        )
        return model, b, c_design, c_sin, metric, "phase_mode", look
    # open
    if args.array_file is None or args.look_deg is None:
        raise ValueError("open arrays need --array-file and --look-deg THETA PHI")
    model = _load_open_array(args.array_file)
    look = Direction.from_degrees(*args.look_deg)
    b = model.manifold(look)
    c_sin = c_numeric(model)
    c_design = c_sin if cost.kind == "sin" else c_numeric(model, cost)
    return model, b, c_design, c_sin, None, "spatial", look


def _run_design(args, c_design, c_sin, b, metric, domain, look):
    common = dict(c_directivity=c_sin, domain=domain, look=look)
    if args.weights == "complex":
        if getattr(args, "t0_db", None) is not None:
            raise ValueError("--t0-db applies to real-weight designs only")
        return design.max_directivity_complex(c_design, b, metric=metric, **common)
    if getattr(args, "t0_db", None) is not None:
        return design.bounded_sensitivity_real(
            c_design, metric, b, 10.0 ** (args.t0_db / 10.0), **common
        )
    return design.max_directivity_real(c_design, b, metric=metric, **common)


# -- subcommands --------------------------------------------------------------


def cmd_design(args) -> int:
    _, b, c_design, c_sin, metric, domain, look = _build_problem(args)
    result = _run_design(args, c_design, c_sin, b, metric, domain, look)
    out = _outdir(args)
    payload = {"meta": _meta(args), **result.to_json_dict()}
    _write_json(out / "design.json", payload)
    if args.weights_csv:
        rows = [
            [i, float(np.real(v)), float(np.imag(v))]
            for i, v in enumerate(result.weights.values)
        ]
        _write_csv(out / "design_weights.csv", ["index", "re", "im"], rows)
    _say(
        args,
        f"design: DI {result.directivity_index_db:.2f} dB, "
        f"sensitivity {result.sensitivity:.6g} ({result.sensitivity_db:.2f} dB) "
        f"-> {out / 'design.json'}",
    )
    return 0


def _pattern_one(args, weight_class: str, out: Path, suffix: str):
    model, b, c_design, c_sin, metric, domain, look = _build_problem(args)
    sub_args = argparse.Namespace(**{**vars(args), "weights": weight_class})
    result = _run_design(sub_args, c_design, c_sin, b, metric, domain, look)
    grid = analysis.beampattern(result.weights, model, resolution_deg=args.resolution_deg)
    lobes = analysis.lobe_analysis(grid)
    analysis.write_pattern_csv(grid, out / f"pattern_{suffix}.csv")
    _write_json(
        out / f"lobes_{suffix}.json",
        {"meta": _meta(args), "weight_class": weight_class, **lobes.to_json_dict()},
    )
    return grid, lobes


def cmd_pattern(args) -> int:
    if args.array == "open":
        raise ValueError(
            "the pattern command covers linear and spherical arrays; "
            "open-array maps are available through the library API"
        )
    out = _outdir(args)
    classes = ["real", "complex"] if args.weights == "both" else [args.weights]
    grids = {}
    for weight_class in classes:
        grid, lobes = _pattern_one(args, weight_class, out, weight_class)
        grids[weight_class] = grid
        side = (
            "none"
            if lobes.sidelobe_level_db is None
            else f"{lobes.sidelobe_level_db:.2f} dB"
        )
        _say(args, f"pattern[{weight_class}]: sidelobe {side}")
    if not args.no_plot:
        xlabel = "arrival angle [deg]" if args.array == "linear" else "angle off look [deg]"
        plotting.save_pattern_figure(
            out / "pattern.png", grids, title=f"{args.array} array beampattern", xlabel=xlabel
        )
    _say(args, f"pattern outputs in {out}")
    return 0


_SWEEP_HEADER = [
    "kr",
    "DI_complex_maxdir",
    "DI_real_maxdir",
    "DI_complex_minsens",
    "DI_real_minsens",
    "sens_complex_maxdir",
    "sens_real_maxdir",
    "sens_complex_minsens",
    "sens_real_minsens",
]


def sweep_rows(order: int, kr_values, m_mics: int):
    """Design the four reference beamformers at each kr; dB columns."""
    rows, warnings_log = [], []
    metric = u_matrix(order, m_mics)
    for kr in kr_values:
        try:
            c_sin = c_spherical(order, kr)
            b = SphericalArray(order=order, kr=kr).look_manifold()
            designs = [
                design.max_directivity_complex(c_sin, b, metric=metric, domain="phase_mode"),
                design.max_directivity_real(c_sin, b, metric=metric, domain="phase_mode"),
                design.min_sensitivity_complex(
                    b, metric=metric, c_directivity=c_sin, domain="phase_mode"
                ),
                design.min_sensitivity_real(
                    b, metric=metric, c_directivity=c_sin, domain="phase_mode"
                ),
            ]
            row = [float(kr)]
            row.extend(r.directivity_index_db for r in designs)
            row.extend(r.sensitivity_db for r in designs)
            rows.append(row)
        except BeamformerError as exc:
            warnings_log.append(f"kr={kr:g}: {exc}")
            rows.append([float(kr)] + [float("nan")] * 8)
    return rows, warnings_log


def cmd_sweep(args) -> int:
    out = _outdir(args)
    kr_values = np.arange(args.kr_start, args.kr_stop + 1e-9, args.kr_step)
    if kr_values.size == 0 or args.kr_start <= 0:
        raise ValueError("kr range must be positive and ascending")
    m_mics = args.m_mics if args.m_mics else (args.n + 1) ** 2
    rows, warnings_log = sweep_rows(args.n, kr_values, m_mics)
    _write_csv(out / "sweep.csv", _SWEEP_HEADER, rows)
    if warnings_log:
        (out / "sweep_warnings.txt").write_text(
            "\n".join(warnings_log) + "\n", encoding="utf-8"
        )
    if not args.no_plot:
        arr = np.array(rows, dtype=float)
        plotting.save_sweep_figure(
            out / "sweep.png",
            arr[:, 0],
            {h: arr[:, i] for i, h in enumerate(_SWEEP_HEADER) if h.startswith("DI")},
            {h: arr[:, i] for i, h in enumerate(_SWEEP_HEADER) if h.startswith("sens")},
            title=f"order {args.n} rigid-sphere designs vs kr",
        )
    _say(args, f"sweep of {kr_values.size} points -> {out / 'sweep.csv'}")
    return 0


def table_rows(order: int, kr: float, m_mics: int, resolution_deg: float, step_theta0, step_floor):
    """One row per cost: sidelobe, physical DI, sensitivity, margin over bound."""
    model = SphericalArray(order=order, kr=kr)
    b = model.look_manifold()
    c_sin = c_spherical(order, kr)
    metric = u_matrix(order, m_mics)
    bounds = design.sensitivity_bounds(b, metric)
    rows, grids = [], {}
    for cost_name in COSTS:
        cost = CostFunction.from_name(cost_name, theta0=step_theta0, floor=step_floor)
        c_design = c_sin if cost_name == "sin" else c_spherical(order, kr, cost)
        result = design.max_directivity_real(
            c_design, b, metric=metric, c_directivity=c_sin, domain="phase_mode"
        )
        grid = analysis.beampattern(result.weights, model, resolution_deg=resolution_deg)
        lobes = analysis.lobe_analysis(grid)
        grids[cost_name] = grid
        rows.append(
            [
                cost_name,
                float(lobes.sidelobe_level_db),
                result.directivity_index_db,
                result.sensitivity_db,
                result.sensitivity_db - 10.0 * math.log10(bounds.t_min_real),
            ]
        )
    return rows, grids


def cmd_table1(args) -> int:
    out = _outdir(args)
    m_mics = args.m_mics if args.m_mics else 32
    rows, grids = table_rows(
        args.n,
        args.kr,
        m_mics,
        args.resolution_deg,
        math.radians(args.step_theta0),
        args.step_floor,
    )
    _write_csv(
        out / "table1.csv",
        ["cost", "sidelobe_db", "DI_db", "sens_db", "sens_minus_bound_db"],
        rows,
    )
    if not args.no_plot:
        plotting.save_pattern_figure(
            out / "table1_patterns.png",
            grids,
            title=f"order {args.n}, kr = {args.kr:g}: cost-function comparison",
            xlabel="angle off look [deg]",
        )
    _say(args, f"cost table -> {out / 'table1.csv'}")
    return 0


def _pwd_weights(scenario, which: str):
    model = SphericalArray(order=scenario.order, kr=scenario.kr)
    b = model.look_manifold()
    c_sin = c_spherical(model.order, model.kr)
    metric = u_matrix(model.order, scenario.layout.num_points)
    if which == "complex":
        return design.max_directivity_complex(
            c_sin, b, metric=metric, domain="phase_mode"
        ).weights
    if which == "real":
        return design.max_directivity_real(
            c_sin, b, metric=metric, domain="phase_mode"
        ).weights
    c_lin = c_spherical(model.order, model.kr, CostFunction.linear())
    return design.max_directivity_real(
        c_lin, b, metric=metric, c_directivity=c_sin, domain="phase_mode"
    ).weights


def cmd_pwd(args) -> int:
    out = _outdir(args)
    scenario = pwd.load_scenario(args.scenario) if args.scenario else pwd.default_scenario()
    requested = ["complex", "real", "linear-cost"] if args.beamformer == "all" else [args.beamformer]
    for which in requested:
        weights = _pwd_weights(scenario, which)
        pmap = scenario.run(weights, resolution_deg=args.resolution_deg, seed=args.seed)
        tag = which.replace("-", "_")
        analysis.write_map_csv(pmap.thetas, pmap.phis, pmap.magnitude_db, out / f"pwd_{tag}.csv")
        peaks = {
            "meta": _meta(args),
            "beamformer": which,
            "peak": {
                "theta_deg": math.degrees(pmap.peak_direction.theta),
                "phi_deg": math.degrees(pmap.peak_direction.phi),
            },
            "secondary_peak": None
            if pmap.secondary_peak is None
            else {
                "theta_deg": math.degrees(pmap.secondary_peak.direction.theta),
                "phi_deg": math.degrees(pmap.secondary_peak.direction.phi),
                "relative_db": pmap.secondary_peak.relative_db,
            },
        }
        _write_json(out / f"pwd_{tag}_peaks.json", peaks)
        if not args.no_plot:
            plotting.save_map_figure(
                out / f"pwd_{tag}.png", pmap, title=f"PWD map, {which} weights"
            )
        _say(
            args,
            f"pwd[{which}]: peak at ({math.degrees(pmap.peak_direction.theta):.0f}, "
            f"{math.degrees(pmap.peak_direction.phi):.0f}) deg",
        )
    return 0


def cmd_layout_gen(args) -> int:
    if args.kind == "fibonacci":
        if args.points is None:
            raise ValueError("fibonacci layouts need --points")
        layout = SphericalLayout.fibonacci(args.points)
    else:
        if args.order is None:
            raise ValueError("gauss layouts need --order")
        layout = SphericalLayout.gauss(args.order)
    path = Path(args.out_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    layout.save(path)
    _say(args, f"{args.kind} layout with {layout.num_points} points -> {path}")
    return 0


def cmd_reproduce(args) -> int:
    targets = (
        [t for t in _REPRODUCE_TARGETS if t != "all"]
        if args.which == "all"
        else [args.which]
    )
    base = dict(quiet=args.quiet, seed=args.seed, no_plot=args.no_plot)
    for target in targets:
        out = str(Path(args.out) / target)
        if target == "linear-md":
            cmd_pattern(
                argparse.Namespace(
                    **base,
                    out=out,
                    array="linear",
                    m=25,
                    d=0.1,
                    f=1715.0,
                    look_deg=[45.0],
                    n=None,
                    kr=None,
                    r=None,
                    m_mics=None,
                    array_file=None,
                    weights="both",
                    cost="sin",
                    step_theta0=20.0,
                    step_floor=0.1,
                    t0_db=None,
                    resolution_deg=0.05,
                )
            )
        elif target == "sphere-md":
            cmd_pattern(
                argparse.Namespace(
                    **base,
                    out=out,
                    array="spherical",
                    m=None,
                    d=None,
                    f=None,
                    look_deg=None,
                    n=10,
                    kr=10.0,
                    r=None,
                    m_mics=None,
                    array_file=None,
                    weights="real",
                    cost="sin",
                    step_theta0=20.0,
                    step_floor=0.1,
                    t0_db=None,
                    resolution_deg=0.05,
                )
            )
        elif target == "sphere-costs":
            for cost_name in ("linear", "uniform", "step"):
                cmd_pattern(
                    argparse.Namespace(
                        **base,
                        out=str(Path(out) / cost_name),
                        array="spherical",
                        m=None,
                        d=None,
                        f=None,
                        look_deg=None,
                        n=10,
                        kr=10.0,
                        r=None,
                        m_mics=None,
                        array_file=None,
                        weights="real",
                        cost=cost_name,
                        step_theta0=20.0,
                        step_floor=0.1,
                        t0_db=None,
                        resolution_deg=0.05,
                    )
                )
        elif target == "kr-sweep":
            cmd_sweep(
                argparse.Namespace(
                    **base,
                    out=out,
                    n=10,
                    kr_start=1.0,
                    kr_stop=10.0,
                    kr_step=0.25,
                    m_mics=None,
                )
            )
        elif target == "cost-table":
            cmd_table1(
                argparse.Namespace(
                    **base,
                    out=out,
                    n=10,
                    kr=10.0,
                    m_mics=32,
                    resolution_deg=0.05,
                    step_theta0=20.0,
                    step_floor=0.1,
                )
            )
        elif target == "pwd-demo":
            cmd_pwd(
                argparse.Namespace(
                    **base,
                    out=out,
                    scenario=None,
                    beamformer="all",
                    resolution_deg=2.0,
                )
            )
        _say(args, f"reproduced {target}")
    return 0


# -- parser -------------------------------------------------------------------


def _add_common(parser):
    parser.add_argument("--out", default="realbeam-out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (noise scenarios)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def _add_array_flags(parser):
    parser.add_argument("--array", choices=("linear", "spherical", "open"), required=True)
    parser.add_argument("--m", type=int, help="linear: number of sensors")
    parser.add_argument("--d", type=float, help="linear: sensor spacing [m]")
    parser.add_argument("--f", type=float, help="frequency [Hz]")
    parser.add_argument("--n", type=int, help="spherical: phase-mode order")
    parser.add_argument("--kr", type=float, help="spherical: wavenumber-radius product")
    parser.add_argument("--r", type=float, help="spherical: radius [m] (with --f)")
    parser.add_argument(
        "--m-mics", type=int, default=None,
        help="spherical: microphone count for the sensitivity metric "
             "(default (N+1)^2)",
    )
    parser.add_argument("--array-file", help="open: JSON file with positions and f_hz")
    parser.add_argument(
        "--look-deg", type=float, nargs="+",
        help="look direction [deg]: THETA for linear, THETA PHI otherwise",
    )


def _add_design_flags(parser, with_t0=True):
    parser.add_argument("--cost", choices=COSTS, default="sin")
    parser.add_argument("--step-theta0", type=float, default=20.0,
                        help="step cost transition angle [deg]")
    parser.add_argument("--step-floor", type=float, default=0.1,
                        help="step cost floor value")
    if with_t0:
        parser.add_argument("--t0-db", type=float, default=None,
                            help="sensitivity cap in dB (real designs)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="realbeam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("design", help="design one beamformer")
    _add_common(p)
    _add_array_flags(p)
    _add_design_flags(p)
    p.add_argument("--weights", choices=("real", "complex"), default="real")
    p.add_argument("--weights-csv", action="store_true", help="also write weights CSV")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("pattern", help="beampattern CSV + lobe report")
    _add_common(p)
    _add_array_flags(p)
    _add_design_flags(p)
    p.add_argument("--weights", choices=("real", "complex", "both"), default="both")
    p.add_argument("--resolution-deg", type=float, default=0.05)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("sweep", help="performance measures vs kr")
    _add_common(p)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--kr-start", type=float, default=1.0)
    p.add_argument("--kr-stop", type=float, default=10.0)
    p.add_argument("--kr-step", type=float, default=0.25)
    p.add_argument("--m-mics", type=int, default=None)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table1", help="cost-function comparison table")
    _add_common(p)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--kr", type=float, default=10.0)
    p.add_argument("--m-mics", type=int, default=32)
    p.add_argument("--resolution-deg", type=float, default=0.05)
    p.add_argument("--step-theta0", type=float, default=20.0)
    p.add_argument("--step-floor", type=float, default=0.1)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("pwd", help="plane-wave decomposition maps")
    _add_common(p)
    p.add_argument("--scenario", help="scenario JSON (default: bundled demo scene)")
    p.add_argument(
        "--beamformer", choices=("complex", "real", "linear-cost", "all"), default="all"
    )
    p.add_argument("--resolution-deg", type=float, default=2.0)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_pwd)

    p = sub.add_parser("layout-gen", help="generate a sampling layout")
    _add_common(p)
    p.add_argument("--kind", choices=("fibonacci", "gauss"), default="fibonacci")
    p.add_argument("--points", type=int, help="fibonacci: number of points")
    p.add_argument("--order", type=int, help="gauss: exactness order")
    p.add_argument("--out-file", required=True)
    p.set_defaults(func=cmd_layout_gen)

    p = sub.add_parser("reproduce", help="one-shot report bundles")
    _add_common(p)
    p.add_argument("--which", choices=_REPRODUCE_TARGETS, default="all")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleSensitivityError as exc:
        print(f"realbeam: infeasible constraint: {exc}", file=sys.stderr)
        return 2
    except (BeamformerError, ValueError, OSError) as exc:
        print(f"realbeam: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
