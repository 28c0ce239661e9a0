"""Command line interface: ``foveatile <subcommand> ...``.

Every subcommand writes CSV (with a header line) to stdout or to the paths
given, and exits 0 on success or 2 with a one-line diagnostic on failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import content_features as cf
from . import quality_model as qm
from . import ratings_screening as rs
from . import streaming_sim as sim
from . import synth
from . import vision_models as vm
from .imageio import read_ppm, write_ppm
from .mia_engine import DEFAULT_QPS, LOSSLESS_QP, TileManifest, build_manifest, default_levels
from .tile_planner import ViewportGeometry, plan

log = logging.getLogger("foveatile")


class CliError(Exception):
    pass


def _pair(text, sep, cast=float, what="value"):
    try:
        a, b = text.lower().split(sep)
        return cast(a), cast(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected {what} like 1{sep}2, got {text!r}") from None


def _xy(text):
    return _pair(text, ",", float, "x,y")


def _res(text):
    return _pair(text, "x", int, "WxH")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _res_list(text):
    return [_res(v) for v in text.split(",") if v.strip()]


def _theta_range(text):
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"empty theta range {text!r}")
    n = int(round((stop - start) / step)) + 1
    return [start + i * step for i in range(n)]


def _emit(text, path=None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands -----------------------------------------------------------------


def cmd_features(args):
    img = read_ppm(args.image)
    f = cf.extract_features(img, gaze=args.gaze, ppd=args.ppd, fov_h=args.fov)
    _emit("rho_si,rho_mu_i,rho_mu_gamma_v,c\n"
          f"{f.rho_si:.10g},{f.rho_mu_i:.10g},{f.rho_mu_gamma_v:.10g},{cf.predict_c(f):.10g}\n")


def _curve_fn(args):
    if args.params:
        impact, params = vm.load_params(args.params)
        return lambda t: min(1.0, vm.ggauss(t, params)), f"{impact} (config)"
    if args.model == "q":
        return vm.q_hat, "q_hat"
    if args.model == "joint":
        return vm.q_hat_joint, "q_hat joint"
    if args.model == "s":
        if args.c is None:
            raise CliError("--model s needs --c")
        return (lambda t: vm.s_hat(t, args.c)), f"s_hat (c={args.c:g})"
    return vm.cone_density, "cone density"


def cmd_curve(args):
    fn, label = _curve_fn(args)
    thetas = args.theta
    vals = [fn(t) for t in thetas]
    _emit("theta,value\n" + "".join(f"{t:g},{v:.10g}\n" for t, v in zip(thetas, vals)), args.output)
    if args.plot:
        from .plotting import plot_curves
        plot_curves({label: (thetas, vals)}, args.plot,
                    ylabel="cones / mm$^2$" if args.model == "cone" and not args.params else "normalized value")


def cmd_pyramid(args):
    img = read_ppm(args.image)
    levels = args.levels or default_levels((img.shape[1], img.shape[0]))
    m = build_manifest(img, levels, args.qps, args.workers, args.tile, source_id=Path(args.image).stem,
                       lossless_qp=None if args.no_lossless else LOSSLESS_QP)
    m.write(args.output)
    total = sum(len(b) for b in m.blobs.values())
    _emit("levels,tiles,entries,bytes,digest\n"
          f"{len(m.levels)},{sum(len(m.tiles(i)) for i in range(len(m.levels)))},{len(m.entries)},"
          f"{total},{m.digest()}\n")


def _planner_cfg(args):
    return sim.PlannerConfig(model=args.model, anchor=args.mode, base_qp=args.base_qp,
                             c_content=args.c, view_size=args.viewport, metric=args.metric,
                             tile_point=args.tile_point)


def cmd_plan(args):
    m = TileManifest.load(args.manifest)
    if not 0 <= args.level < len(m.levels):
        raise CliError(f"level {args.level} not in manifest (0..{len(m.levels) - 1})")
    gaze = args.gaze or (m.levels[args.level][0] / 2, m.levels[args.level][1] / 2)
    vp = ViewportGeometry.around(gaze, m.levels[args.level], args.viewport, args.fov, args.level)
    p = plan(vp, m, args.model, args.mode, args.base_qp, c_content=args.c, metric=args.metric,
             tile_point=args.tile_point)
    for note in p.notes:
        log.warning(note)
    _emit(p.to_text(), args.output)
    if args.plot:
        from .plotting import plot_plan
        plot_plan(p, m, args.plot)


def cmd_simulate(args):
    m = TileManifest.load(args.manifest)
    trace = sim.load_trace(args.trace)
    cfg = _planner_cfg(args)
    report = sim.simulate(trace, m, args.bandwidths, cfg)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "retrieval.csv").write_text(report.to_csv())
        (out / "retrieval_table.csv").write_text(report.table())
        points = sim.savings_vs_size(trace, m, cfg) if m.lossless_qp is not None else None
        if points is not None:
            (out / "savings_vs_size.csv").write_text(sim.savings_csv(points))
        if not args.no_plot:
            from .plotting import plot_retrieval, plot_savings_vs_size
            plot_retrieval(report, out / "retrieval.png")
            if points is not None:
                plot_savings_vs_size(points, out / "savings_vs_size.png")
    _emit(report.table())


def cmd_mos(args):
    if args.beta_table:
        table = qm.load_beta_table(args.beta_table)
    else:
        table = {vm.S_MAX: args.beta}
    p = qm.QStarParams(args.alpha, table, args.q_max)
    if args.mode == "joint":
        val = qm.mos_foveated_joint(args.s, args.theta_c, p)
    elif args.mode == "q":
        val = qm.mos_foveated_q(args.theta_c, p)
    else:
        if args.c is None:
            raise CliError("--mode s needs --c")
        val = qm.mos_foveated_s(args.theta_c, args.c, p)
    _emit(f"mos\n{val:.6f}\n")


def cmd_screen(args):
    records = rs.load_ratings(args.ratings)
    clean, excl = rs.screen(records, k=args.k, sample_std=args.sample_std, iterate=args.iterate)
    if args.clean:
        Path(args.clean).write_text(rs.records_csv(clean))
    if args.log:
        Path(args.log).write_text(rs.exclusions_csv(excl))
    expected = {r.group for r in records}
    _emit(rs.aggregate_csv(rs.aggregate(clean, expected)))


def cmd_synth(args):
    if args.kind == "trace":
        if not args.manifest:
            raise CliError("synth trace needs --manifest")
        m = TileManifest.load(args.manifest)
        _emit(sim.format_trace(sim.navigation_trace(m, args.steps, args.seed)), args.output)
        return
    if not args.output:
        raise CliError("synth images need -o/--output")
    write_ppm(args.output, synth.make(args.kind, args.width, args.height, args.seed))


# -- parser ------------------------------------------------------------------------


def _add_planner_opts(p):
    p.add_argument("--mode", choices=["relative", "absolute"], default="relative",
                   help="anchor ring 0 at --base-qp (relative) or use raw model steps (default: relative)")
    p.add_argument("--model", choices=["q", "s", "joint"], default="q",
                   help="quality model driving the rings (default: q)")
    p.add_argument("--base-qp", type=int, default=22, help="uniform / ring-0 QP (default: 22)")
    p.add_argument("--c", type=float, default=None, help="content parameter c for s/joint models")
    p.add_argument("--viewport", type=_res, default=sim.DEFAULT_VIEW, help="rendered FoV size WxH (default: 2560x1440)")
    p.add_argument("--metric", choices=["radial", "rect"], default="radial",
                   help="eccentricity distance: Euclidean or Chebyshev (default: radial)")
    p.add_argument("--tile-point", choices=["nearest", "center"], default="nearest",
                   help="tile point whose eccentricity picks its ring (default: nearest to gaze)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="foveatile", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, metavar="subcommand")

    p = sub.add_parser("features", help="content features and predicted c of a P6 image")
    p.add_argument("image")
    p.add_argument("--gaze", type=_xy, default=None, help="fixation x,y in pixels (default: centre)")
    p.add_argument("--ppd", type=float, default=None, help="pixels per degree (default: width / fov)")
    p.add_argument("--fov", type=float, default=110.0, help="horizontal FoV in degrees (default: 110)")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("curve", help="dump a model curve as theta,value CSV")
    p.add_argument("--model", choices=["q", "s", "joint", "cone"], default="q", help="curve to sample (default: q)")
    p.add_argument("--theta", type=_theta_range, default=_theta_range("0:55:1"),
                   help="start:stop:step, stop inclusive (default: 0:55:1)")
    p.add_argument("--c", type=float, default=None, help="content parameter for --model s")
    p.add_argument("--params", default=None, help="parameter file with impact, a, b, c, d keys")
    p.add_argument("-o", "--output", default=None, help="CSV path (default: stdout)")
    p.add_argument("--plot", default=None, help="also render the curve to this image file")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("pyramid", help="build a tiled multi-QP pyramid")
    psub = p.add_subparsers(dest="action", required=True, metavar="action")
    b = psub.add_parser("build", help="transcode a P6 image into a manifest directory")
    b.add_argument("image")
    b.add_argument("-o", "--output", required=True, help="manifest directory")
    b.add_argument("--tile", type=_res, default=(256, 144), help="tile size WxH (default: 256x144)")
    b.add_argument("--qps", type=_int_list, default=list(DEFAULT_QPS), help="QP ladder (default: 22,25,...,49)")
    b.add_argument("--levels", type=_res_list, default=None,
                   help="comma-separated WxH levels, descending (default: native + standard ladder)")
    b.add_argument("--workers", type=int, default=1, help="parallel workers (default: 1)")
    b.add_argument("--no-lossless", action="store_true", help="skip the q=1 reference rung")
    b.set_defaults(func=cmd_pyramid)

    p = sub.add_parser("plan", help="foveation plan for one gaze position")
    p.add_argument("--manifest", required=True)
    p.add_argument("--gaze", type=_xy, default=None, help="gaze x,y in level-image pixels (default: centre)")
    p.add_argument("--level", type=int, default=0, help="pyramid zoom level (default: 0)")
    p.add_argument("--fov", type=float, default=110.0, help="horizontal FoV in degrees (default: 110)")
    _add_planner_opts(p)
    p.add_argument("-o", "--output", default=None, help="plan path (default: stdout)")
    p.add_argument("--plot", default=None, help="render the tile QP map to this image file")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="replay a navigation trace, uniform vs foveated")
    p.add_argument("--trace", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--bandwidths", type=_float_list, default=[5.0, 10.0, 20.0],
                   help="Mbit/s list (default: 5,10,20)")
    _add_planner_opts(p)
    p.add_argument("--out-dir", default=None, help="write report CSVs and figures here")
    p.add_argument("--no-plot", action="store_true", help="skip figures in --out-dir")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mos", help="predicted MOS of a foveated image")
    p.add_argument("--s", type=_res, default=vm.S_MAX, help="spatial resolution WxH (default: 4096x2160)")
    p.add_argument("--theta-c", type=float, default=0.0, help="central anchor eccentricity, 0..9 (default: 0)")
    p.add_argument("--alpha", type=float, default=5.0, help="spatial exponent alpha (default: 5, illustrative)")
    p.add_argument("--beta", type=float, default=4.0, help="beta for every resolution (default: 4, illustrative)")
    p.add_argument("--beta-table", default=None, help="file of 'WxH beta' lines; overrides --beta")
    p.add_argument("--q-max", type=float, default=qm.DEFAULT_Q_MAX, help="maximum MOS (default: 86)")
    p.add_argument("--mode", choices=["s", "q", "joint"], default="joint", help="foveation type (default: joint)")
    p.add_argument("--c", type=float, default=None, help="content parameter for --mode s")
    p.set_defaults(func=cmd_mos)

    p = sub.add_parser("screen-ratings", help="2-sigma screening and aggregation of ratings CSV")
    p.add_argument("ratings")
    p.add_argument("--clean", default=None, help="write surviving records here")
    p.add_argument("--log", default=None, help="write the exclusion log here")
    p.add_argument("--k", type=float, default=2.0, help="rejection threshold in sigmas (default: 2)")
    p.add_argument("--sample-std", action="store_true", help="use sample instead of population sigma")
    p.add_argument("--iterate", action="store_true", help="repeat screening until nothing changes")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("synth", help="deterministic synthetic images or navigation traces")
    p.add_argument("kind", choices=list(synth.KINDS) + ["trace"])
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--width", type=int, default=1024)
    p.add_argument("--height", type=int, default=576)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--manifest", default=None, help="manifest for 'trace'")
    p.add_argument("--steps", type=int, default=12, help="trace length (default: 12)")
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        args.func(args)
    except (CliError, ValueError, OSError, KeyError, RuntimeError) as exc:
        print(f"foveatile: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
