"""Command-line front end: ``tvscad <command> ...``.

Commands: generate, add-noise, denoise, sweep, sure, two-pixel, repro.
Run ``tvscad <command> --help`` for the flags of each.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import estimators, imageio, metrics, solvers, synth, two_pixel
from .grid import total_variation
from .penalty import DEFAULT_A, ScadParams

log = logging.getLogger("tvscad")

PATTERNS = {
    "nested-squares": "nested_squares",
    "nested-squares-thick": "nested_squares_thick",
    "rotated-diamonds": "rotated_diamonds",
}
DEFAULT_E = 10.0
SATV_E_VALUES = (1.0, 10.0, 100.0, 500.0)


class CommandError(Exception):
    pass


def parse_levels(text):
    try:
        levels = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}")
    if not levels:
        raise argparse.ArgumentTypeError("empty level list")
    return levels


def parse_grid(text):
    """``lo:hi:n`` (log-spaced), ``lo:hi:n:lin`` or an explicit comma list."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "lin")):
                raise ValueError
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            if not 0 < lo <= hi or n < 1:
                raise ValueError
            spacing = parts[3] if len(parts) == 4 else "log"
            grid = np.geomspace(lo, hi, n) if spacing == "log" else np.linspace(lo, hi, n)
        else:
            grid = np.array([float(x) for x in text.split(",")])
            if grid.size == 0 or np.any(grid <= 0):
                raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda grid {text!r}; use lo:hi:n[:log|lin] or a,b,c")
    return sorted(float(x) for x in grid)


def positive(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--dt", type=positive, help="time step (default: scheme-specific)")
    g.add_argument("--iters", type=int, help="max inner iterations (default 500)")
    g.add_argument("--tol", type=positive, help="relative-change stopping tolerance (default 1e-4)")
    g.add_argument("--beta", type=float, help="gradient magnitude smoothing (default 1e-3)")
    g.add_argument("--scheme", choices=solvers.SCHEMES, help="time stepping scheme")


def _method_flags(p):
    p.add_argument("--method", choices=solvers.METHODS, required=True)
    p.add_argument("--e", type=positive, help="SATV stabilization offset (satv only)")
    p.add_argument("--lambda1", type=positive, help="SATV first-step lambda (satv only)")
    p.add_argument("--a", type=float, help=f"SCAD shape parameter (scad only, default {DEFAULT_A})")
    p.add_argument("--K", type=int, help="MM outer iterations (scad only, default 2)")


def _check_method_flags(parser, args):
    if args.method != "satv":
        for flag in ("e", "lambda1", "lambda2"):
            if getattr(args, flag, None) is not None:
                parser.error(f"--{flag} only applies to --method satv")
    if args.method != "scad":
        for flag in ("a", "K"):
            if getattr(args, flag, None) is not None:
                parser.error(f"--{flag} only applies to --method scad")
    if args.method == "satv" and args.e is None:
        log.warning("--e not given for satv; using e=%g", DEFAULT_E)
        args.e = DEFAULT_E
    if args.method == "scad" and args.a is not None and not args.a > 2:
        parser.error("--a must be > 2")
    if args.method == "scad" and args.K is not None and args.K < 1:
        parser.error("--K must be >= 1")


def _solver_config(args):
    return solvers.SolverConfig(
        dt=args.dt,
        max_inner_iters=args.iters or 500,
        rel_tol=args.tol or 1e-4,
        beta=1e-3 if args.beta is None else args.beta,
        outer_iters=getattr(args, "K", None) or 2,
        scheme=args.scheme or "semi-implicit",
    )


def _method_params(args):
    params = {}
    if args.method == "scad":
        params["a"] = args.a or DEFAULT_A
    if args.method == "satv":
        params["e"] = args.e
        if args.lambda1 is not None:
            params["lambda1"] = args.lambda1
    return params


def _load(path, what="input"):
    if not Path(path).exists():
        raise CommandError(f"{what} file not found: {path}")
    return imageio.load_image(path)


def cmd_generate(args):
    try:
        spec = synth.PatternSpec.default(PATTERNS[args.pattern], args.size, args.levels, args.band_width)
    except ValueError as exc:
        raise CommandError(str(exc))
    img = synth.generate(spec)
    imageio.write_pgm(img, args.out, clamp=False)
    print(f"total_variation: {total_variation(img):.9g}")


def cmd_add_noise(args):
    img = _load(args.input)
    noisy = synth.add_gaussian_noise(img, args.sigma, args.seed)
    imageio.write_encoded_pgm(noisy, args.out, sigma_requested=args.sigma, seed=args.seed)
    print(f"sigma_estimate: {estimators.estimate_sigma(noisy):.6g}")


def _run_denoise(f, args, cfg):
    """Return ``(u, objective trace)`` for the requested method."""
    if args.method == "tv":
        res = solvers.weighted_tv_flow(f, args.lam, cfg)
        return res.u, res.objectives
    if args.method == "satv":
        u0 = solvers.tv_denoise(f, args.lam, cfg)
        lam2 = args.lambda2 or args.lam
        res = solvers.weighted_tv_flow(f, solvers.satv_weights(u0, lam2, args.e), cfg)
        return res.u, res.objectives
    p = ScadParams(args.lam, args.a or DEFAULT_A)
    return solvers.scad_denoise(f, p, cfg, return_objectives=True)


def cmd_denoise(args):
    f = _load(args.input)
    truth = _load(args.truth, "truth") if args.truth else None
    if truth is not None and truth.shape != f.shape:
        raise CommandError(f"truth shape {truth.shape} differs from input {f.shape}")
    cfg = _solver_config(args)
    u, trace = _run_denoise(f, args, cfg)
    report = {"method": args.method, "lambda": args.lam, "objective_trace": trace}
    if args.method == "satv":
        report.update(lambda2=args.lambda2 or args.lam, e=args.e)
    if args.method == "scad":
        report.update(a=args.a or DEFAULT_A, K=cfg.outer_iters)
    if truth is not None:
        err = metrics.mse(truth, u)
        report["mse"] = err
        print(f"mse: {err:.6g}")
        levels = np.unique(truth)
        if levels.size <= 16:
            report["level_shifts"] = {f"{v:g}": metrics.level_shift(truth, u, v) for v in levels}
    written = []
    try:
        imageio.write_pgm(u, args.out, clamp=True)
        written.append(Path(args.out))
        if args.report:
            imageio.atomic_write(args.report, json.dumps(report, indent=2) + "\n", mode="w")
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise


def _print_best(curve, key):
    best = estimators.best_record(curve, key)
    print(f"best: lambda={best.lam:.9g} {key}={getattr(best, key):.9g}")
    return best


def cmd_sweep(args):
    f = _load(args.input)
    truth = _load(args.truth, "truth")
    curve = estimators.sweep_true_mse(f, truth, args.method, args.lambdas, _method_params(args),
                                      _solver_config(args))
    imageio.write_csv(curve, args.out_csv)
    _print_best(curve, "mse")


def cmd_sure(args):
    f = _load(args.input)
    truth = _load(args.truth, "truth") if args.truth else None
    sigma = args.sigma if args.sigma is not None else estimators.estimate_sigma(f)
    print(f"sigma: {sigma:.6g}{'' if args.sigma is not None else ' (estimated)'}")
    cfg = estimators.SureConfig(epsilon=args.epsilon, seed=args.seed, sigma=sigma, n_probes=args.probes)
    scfg = _solver_config(args)
    params = _method_params(args)
    lam, curve = estimators.select_lambda_sure(f, args.method, args.lambdas, params, cfg, scfg, truth)
    imageio.write_csv(curve, args.out_csv)
    print(f"selected lambda: {lam:.9g}")
    if args.out:
        try:
            u = solvers.make_denoiser(args.method, lam, params, scfg)(f)
            imageio.write_pgm(u, args.out, clamp=True)
        except BaseException:
            Path(args.out_csv).unlink(missing_ok=True)
            raise


def cmd_two_pixel(args):
    if args.penalty == "scad":
        pen = ScadParams(args.lam, args.a)
        sol = two_pixel.two_pixel_scad(args.y1, args.y2, pen)
    else:
        pen = args.lam
        sol = two_pixel.two_pixel_tv(args.y1, args.y2, pen)
    print(f"theta1={sol.theta1:.9g} theta2={sol.theta2:.9g} branch={sol.branch} objective={sol.objective:.9g}")
    if args.verify:
        ref = two_pixel.two_pixel_brute_force(args.y1, args.y2, pen)
        gap = ref.objective - sol.objective
        dist = max(abs(ref.theta1 - sol.theta1), abs(ref.theta2 - sol.theta2))
        print(f"brute_force: theta1={ref.theta1:.9g} theta2={ref.theta2:.9g} objective={ref.objective:.9g}")
        print(f"gap: objective={gap:.3g} theta={dist:.3g}")


def run_repro(size=256, sigma=20.0, seed=0, points=12, out_dir=None, cfg=None):
    """Sweep TV, SATV (over e) and SCAD on the thick nested-squares scenario.

    Returns a list of row dicts, one per method, at each method's best lambda.
    """
    truth, f = synth.make_scenario("nested_squares_thick", sigma, seed, size)
    rows = []
    curves = {}

    tv_curve = estimators.sweep_true_mse(f, truth, "tv", estimators.default_lambda_grid("tv", points),
                                         solver_cfg=cfg)
    curves["tv"] = tv_curve
    tv_best = estimators.best_record(tv_curve)
    u_tv = solvers.tv_denoise(f, tv_best.lam, cfg)
    rows.append(dict(method="tv", lam=tv_best.lam, e=None, mse=tv_best.mse, u=u_tv))

    satv_best = None
    for e in SATV_E_VALUES:
        grid = estimators.default_lambda_grid("satv", points, e)
        params = {"e": e, "lambda1": tv_best.lam}
        curve = estimators.sweep_true_mse(f, truth, "satv", grid, params, cfg)
        curves[f"satv_e{e:g}"] = curve
        best = estimators.best_record(curve)
        if satv_best is None or best.mse < satv_best[1].mse:
            satv_best = (e, best)
    e, best = satv_best
    u_satv = solvers.satv_denoise(f, tv_best.lam, best.lam, e, cfg, tv_estimate=u_tv)
    rows.append(dict(method="satv", lam=best.lam, e=e, mse=best.mse, u=u_satv))

    scad_curve = estimators.sweep_true_mse(f, truth, "scad", estimators.default_lambda_grid("scad", points),
                                           solver_cfg=cfg)
    curves["scad"] = scad_curve
    best = estimators.best_record(scad_curve)
    u_scad = solvers.scad_denoise(f, ScadParams(best.lam), cfg)
    rows.append(dict(method="scad", lam=best.lam, e=None, mse=best.mse, u=u_scad))

    for row in rows:
        row["shift0"] = metrics.level_shift(truth, row["u"], 0.0)
        row["shift255"] = metrics.level_shift(truth, row["u"], 255.0)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, curve in curves.items():
            imageio.write_csv(curve, out / f"sweep_{name}.csv")
        imageio.write_pgm(truth, out / "truth.pgm", clamp=True)
        imageio.write_encoded_pgm(f, out / "noisy.pgm", sigma_requested=sigma, seed=seed)
        for row in rows:
            imageio.write_pgm(row["u"], out / f"restored_{row['method']}.pgm", clamp=True)
    return rows


def cmd_repro(args):
    rows = run_repro(args.size, args.sigma, args.seed, args.points, args.out_dir)
    print(f"{'method':<8}{'lambda':>12}{'e':>8}{'mse':>12}{'shift@0':>10}{'shift@255':>11}")
    for r in rows:
        e = "" if r["e"] is None else f"{r['e']:g}"
        print(f"{r['method']:<8}{r['lam']:>12.4g}{e:>8}{r['mse']:>12.4f}{r['shift0']:>10.3f}{r['shift255']:>11.3f}")


def build_parser():
    parser = argparse.ArgumentParser(prog="tvscad", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic blocky test image")
    p.add_argument("--pattern", choices=sorted(PATTERNS), required=True)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--levels", type=parse_levels, help="comma-separated intensities")
    p.add_argument("--band-width", type=int, dest="band_width")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("add-noise", help="add seeded Gaussian noise (16-bit output + JSON sidecar)")
    p.add_argument("--sigma", type=positive, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_add_noise)

    p = sub.add_parser("denoise", help="restore an image with tv, satv or scad")
    _method_flags(p)
    p.add_argument("--lambda", dest="lam", type=positive, required=True)
    p.add_argument("--lambda2", type=positive, help="SATV second-step lambda (default --lambda)")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="clean image; prints the MSE")
    p.add_argument("--report", help="write a JSON report here")
    _solver_flags(p)
    p.set_defaults(func=cmd_denoise, validate=True)

    p = sub.add_parser("sweep", help="true-MSE curve over a lambda grid")
    _method_flags(p)
    p.add_argument("--lambdas", type=parse_grid, required=True, help="lo:hi:n (log-spaced) or a,b,c")
    p.add_argument("--truth", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-csv", dest="out_csv", required=True)
    _solver_flags(p)
    p.set_defaults(func=cmd_sweep, validate=True)

    p = sub.add_parser("sure", help="choose lambda by Monte-Carlo SURE")
    _method_flags(p)
    p.add_argument("--lambdas", type=parse_grid, required=True, help="lo:hi:n (log-spaced) or a,b,c")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--epsilon", type=positive, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=positive, help="noise std (default: estimated from the input)")
    p.add_argument("--probes", type=int, default=1)
    p.add_argument("--out-csv", dest="out_csv", required=True)
    p.add_argument("--out", help="also write the restoration at the selected lambda")
    p.add_argument("--truth", help="clean image; fills the mse column")
    _solver_flags(p)
    p.set_defaults(func=cmd_sure, validate=True)

    p = sub.add_parser("two-pixel", help="closed-form two-pixel minimizer")
    p.add_argument("--y1", type=float, required=True)
    p.add_argument("--y2", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=positive, default=1.0)
    p.add_argument("--a", type=float, default=DEFAULT_A)
    p.add_argument("--penalty", choices=("scad", "tv"), default="scad")
    p.add_argument("--verify", action="store_true", help="compare with the brute-force grid oracle")
    p.set_defaults(func=cmd_two_pixel)

    p = sub.add_parser("repro", help="TV vs SATV vs SCAD comparison on the bundled scenario")
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--sigma", type=positive, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=12, help="lambda grid points per sweep")
    p.add_argument("--out-dir", dest="out_dir", help="write curves and images here")
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "validate", False):
        _check_method_flags(parser, args)
    if args.command == "two-pixel" and args.penalty == "scad" and not args.a > 2:
        parser.error("--a must be > 2")
    try:
        args.func(args)
    except (CommandError, ValueError, OSError, solvers.DivergenceError) as exc:
        print(f"tvscad {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
