"""Command-line surface.

Subcommands: ``synth``, ``degrade``, ``complete``, ``subtract``,
``robust-complete``, ``sci``, ``metrics``, ``accegy``, ``baseline-tnn``
and ``convert``.  Solver defaults come from
:func:`ssnt.solvers.default_config`; every command is seed-deterministic
and identical invocations produce byte-identical tensor and CSV outputs.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 malformed tensor
file, 5 inconsistent shapes or configuration.  Failures print one
machine-readable line ``error code=<n> kind=<kind> detail=<...>`` on
stderr.
"""

import argparse
import sys
from dataclasses import asdict, replace
from datetime import datetime, timezone

import numpy as np

from .fileio import (
    FormatError,
    RunManifest,
    export_diagnostics,
    read_tensor,
    write_csv,
    write_tensor,
)
from .metrics import acc_egy, metric_report, tnn_baseline_complete
from .network import forward_f
from .problems import (
    ObservationModel,
    SamplingSpec,
    degrade,
    init_observation,
    synth_low_tubal_rank,
)
from .solvers import default_config, solve_ssnt, solve_ssnt_tv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_CONFIG = 5


def _now():
    return datetime.now(timezone.utc).isoformat()


def _parse_dims(text):
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 3 or any(p < 1 for p in parts):
        raise ValueError(f"bad dims {text!r}; expected n1,n2,n3")
    return tuple(parts)


def _add_solver_flags(sub):
    sub.add_argument("--tv", action="store_true", help="use the TV-regularized solver")
    sub.add_argument("--linear", action="store_true", help="drop the nonlinearity")
    sub.add_argument("--layers", default=None, metavar="P,Q", help="layer counts, e.g. 2,2")
    sub.add_argument("--lambda", dest="lam", type=float, default=None, help="low-rank weight")
    sub.add_argument("--tau", type=float, default=None, help="TV weight")
    sub.add_argument("--beta", type=float, default=None, help="ADMM penalty")
    sub.add_argument("--tmax", type=int, default=None, help="outer iterations")
    sub.add_argument("--inner-steps", type=int, default=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--lr", type=float, default=None, help="Adam learning rate")
    sub.add_argument("--width", type=int, default=None, help="transform interface width")
    sub.add_argument("--slope", type=float, default=None, help="leaky-relu slope")
    sub.add_argument("--diagnostics", default=None, metavar="CSV")
    sub.add_argument("--manifest", default=None, metavar="JSON")
    sub.add_argument("--save-transform", default=None, metavar="SSNT",
                     help="write the transformed tensor f(obs)")
    sub.add_argument("--ref", default=None, metavar="SSNT", help="ground truth for metrics")
    sub.add_argument("--peak", type=float, default=1.0, help="PSNR/SSIM dynamic range")


def _config_from_args(args, kind, dims):
    cfg = default_config(kind, dims)
    over = {"seed": args.seed}
    if args.lam is not None:
        over["lam"] = args.lam
    if args.tau is not None:
        over["tau"] = args.tau
    if args.beta is not None:
        over["beta"] = args.beta
    if args.tmax is not None:
        over["t_max"] = args.tmax
    if args.inner_steps is not None:
        over["inner_steps"] = args.inner_steps
    if args.lr is not None:
        over["lr"] = args.lr
    if args.width is not None:
        over["width"] = args.width
    if args.slope is not None:
        over["slope"] = args.slope
    if args.layers is not None:
        p, q = (int(v) for v in args.layers.split(","))
        over["p"] = p
        over["q"] = q
    if args.linear:
        over["activation"] = "identity"
    return replace(cfg, **over)


def _run_solver(kind, model, args, outputs):
    """Shared solve / write / report path of the four solver commands.

    ``outputs`` maps output labels (``x``, optionally ``sparse``) to
    file paths.
    """
    cfg = _config_from_args(args, kind, model.dims)
    started = _now()
    x0 = init_observation(model)
    solver = solve_ssnt_tv if args.tv else solve_ssnt
    x, params, history = solver(model, cfg, x0=x0)

    write_tensor(outputs["x"], x)
    if "sparse" in outputs:
        sparse = model.measurement - x
        if model.kind == "rtc":
            sparse = model.mask * sparse
        write_tensor(outputs["sparse"], sparse)
    if args.save_transform:
        y, _ = forward_f(x0, params)
        write_tensor(args.save_transform, y)
        outputs["transform"] = args.save_transform
    if args.diagnostics and history:
        export_diagnostics(history, args.diagnostics)

    metrics = None
    if args.ref:
        ref = read_tensor(args.ref)
        rep = metric_report(x, ref, peak=args.peak)
        metrics = {"psnr": rep.psnr, "ssim": rep.ssim, "sam": rep.sam, "peak": rep.peak}
        print(f"psnr={rep.psnr!r} ssim={rep.ssim!r} sam={rep.sam!r}")
    if args.manifest:
        RunManifest(
            command=kind,
            config=asdict(cfg),
            seed=cfg.seed,
            started=started,
            finished=_now(),
            outputs=dict(outputs),
            diagnostics_csv=args.diagnostics,
            metrics=metrics,
        ).save(args.manifest)
    return EXIT_OK


def _cmd_synth(args):
    dims = _parse_dims(args.dims)
    x = synth_low_tubal_rank(dims, args.tubal_rank, args.seed)
    write_tensor(args.out, x)
    return EXIT_OK


def _cmd_degrade(args):
    x = read_tensor(args.input)
    spec = SamplingSpec(
        sr=args.sr, noise_sr=args.noise_sr, gauss_sigma=args.sigma, seed=args.seed
    )
    model = degrade(x, args.kind, spec)
    if args.kind == "sci":
        write_tensor(args.obs, model.measurement[:, :, None])
    else:
        write_tensor(args.obs, model.measurement)
    if model.mask is not None:
        if args.mask is None:
            raise ValueError(f"{args.kind} degradation needs --mask to store the mask")
        write_tensor(args.mask, model.mask)
    return EXIT_OK


def _load_tc_like(args, kind):
    """Observation for tc/rtc: either --obs/--mask files or a fresh
    degradation of --input at --sr."""
    if args.input is not None:
        x_true = read_tensor(args.input)
        spec = SamplingSpec(sr=args.sr, noise_sr=args.noise_sr, seed=args.seed)
        return degrade(x_true, kind, spec)
    if args.obs is None or args.mask is None:
        raise ValueError("need either --input with --sr, or --obs with --mask")
    return ObservationModel(kind, read_tensor(args.obs), read_tensor(args.mask))


def _cmd_complete(args):
    model = _load_tc_like(args, "tc")
    if args.ref is None and args.input is not None:
        args.ref = args.input
    return _run_solver("tc", model, args, {"x": args.out})


def _cmd_robust_complete(args):
    model = _load_tc_like(args, "rtc")
    outputs = {"x": args.out}
    if args.sparse:
        outputs["sparse"] = args.sparse
    return _run_solver("rtc", model, args, outputs)


def _cmd_subtract(args):
    video = read_tensor(args.input)
    model = ObservationModel("bs", video)
    outputs = {"x": args.background}
    if args.foreground:
        outputs["sparse"] = args.foreground
    return _run_solver("bs", model, args, outputs)


def _cmd_sci(args):
    if args.input is not None:
        x_true = read_tensor(args.input)
        spec = SamplingSpec(sr=args.sr, gauss_sigma=args.sigma, seed=args.seed)
        model = degrade(x_true, "sci", spec)
        if args.ref is None:
            args.ref = args.input
    else:
        if args.measurement is None or args.mask is None:
            raise ValueError("need either --input, or --measurement with --mask")
        meas = read_tensor(args.measurement)
        if meas.shape[2] != 1:
            raise ValueError("sci measurement file must have dims n1,n2,1")
        model = ObservationModel("sci", meas[:, :, 0], read_tensor(args.mask))
    return _run_solver("sci", model, args, {"x": args.out})


def _cmd_metrics(args):
    x = read_tensor(args.x)
    ref = read_tensor(args.ref)
    peak = float(np.abs(ref).max()) if args.peak_from_ref else args.peak
    rep = metric_report(x, ref, peak=peak)
    print(f"psnr={rep.psnr!r} ssim={rep.ssim!r} sam={rep.sam!r}")
    if args.out:
        write_csv(
            args.out,
            ("psnr", "ssim", "sam", "peak"),
            [(rep.psnr, rep.ssim, rep.sam, rep.peak)],
        )
    return EXIT_OK


def _cmd_accegy(args):
    t = read_tensor(args.x)
    curve = acc_egy(np.fft.fft(t, axis=2) if args.dft else t)
    write_csv(
        args.out,
        ("fraction", "energy_ratio"),
        list(zip(curve.fractions.tolist(), curve.energy_ratio.tolist())),
    )
    return EXIT_OK


def _cmd_baseline_tnn(args):
    model = ObservationModel("tc", read_tensor(args.obs), read_tensor(args.mask))
    x = tnn_baseline_complete(model, rho=args.rho, iters=args.iters)
    write_tensor(args.out, x)
    return EXIT_OK


def _cmd_convert(args):
    if args.from_csv:
        values = np.loadtxt(args.from_csv, dtype=np.float64, ndmin=1)
        dims = _parse_dims(args.dims)
        n1, n2, n3 = dims
        if values.size != n1 * n2 * n3:
            raise ValueError(f"{values.size} values do not fill dims {dims}")
        t = values.reshape(n3, n1, n2).transpose(1, 2, 0)
        norm = None
        if not args.no_normalize:
            lo, hi = float(t.min()), float(t.max())
            if hi > lo:
                t = (t - lo) / (hi - lo)
            norm = {"min": lo, "max": hi}
        write_tensor(args.out, t)
        if args.manifest:
            RunManifest(
                command="convert",
                config={"dims": list(dims), "normalize": not args.no_normalize},
                seed=0,
                started=_now(),
                finished=_now(),
                outputs={"x": args.out},
                normalization=norm,
            ).save(args.manifest)
    else:
        t = read_tensor(args.to_csv)
        flat = np.ascontiguousarray(t.transpose(2, 0, 1)).ravel()
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(repr(float(v)) for v in flat) + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ssnt",
        description="Self-supervised nonlinear transform tensor recovery",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate synthetic low-tubal-rank ground truth")
    s.add_argument("--dims", required=True)
    s.add_argument("--tubal-rank", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_synth)

    s = sub.add_parser("degrade", help="simulate an observation model")
    s.add_argument("--kind", choices=("tc", "bs", "rtc", "sci"), required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--sr", type=float, default=1.0)
    s.add_argument("--noise-sr", type=float, default=0.0)
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--obs", required=True)
    s.add_argument("--mask", default=None)
    s.set_defaults(func=_cmd_degrade)

    s = sub.add_parser("complete", help="tensor completion")
    s.add_argument("--obs", default=None)
    s.add_argument("--mask", default=None)
    s.add_argument("--input", default=None, help="ground truth; degrade at --sr first")
    s.add_argument("--sr", type=float, default=1.0)
    s.add_argument("--noise-sr", type=float, default=0.0, help=argparse.SUPPRESS)
    s.add_argument("--out", required=True)
    _add_solver_flags(s)
    s.set_defaults(func=_cmd_complete)

    s = sub.add_parser("robust-complete", help="completion under sparse corruption")
    s.add_argument("--obs", default=None)
    s.add_argument("--mask", default=None)
    s.add_argument("--input", default=None)
    s.add_argument("--sr", type=float, default=1.0)
    s.add_argument("--noise-sr", type=float, default=0.1)
    s.add_argument("--out", required=True)
    s.add_argument("--sparse", default=None, help="write the implied sparse part")
    _add_solver_flags(s)
    s.set_defaults(func=_cmd_robust_complete)

    s = sub.add_parser("subtract", help="background subtraction")
    s.add_argument("--input", required=True)
    s.add_argument("--background", required=True)
    s.add_argument("--foreground", default=None)
    _add_solver_flags(s)
    s.set_defaults(func=_cmd_subtract)

    s = sub.add_parser("sci", help="snapshot compressive imaging")
    s.add_argument("--measurement", default=None)
    s.add_argument("--mask", default=None)
    s.add_argument("--input", default=None)
    s.add_argument("--sr", type=float, default=0.25)
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--out", required=True)
    _add_solver_flags(s)
    s.set_defaults(func=_cmd_sci)

    s = sub.add_parser("metrics", help="psnr / ssim / sam report")
    s.add_argument("x")
    s.add_argument("ref")
    s.add_argument("--peak", type=float, default=1.0)
    s.add_argument("--peak-from-ref", action="store_true")
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_metrics)

    s = sub.add_parser("accegy", help="singular-value energy compaction curve")
    s.add_argument("x")
    s.add_argument("--dft", action="store_true", help="transform along mode 3 first")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_accegy)

    s = sub.add_parser("baseline-tnn", help="convex transform-domain completion oracle")
    s.add_argument("--obs", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--rho", type=float, default=1e-2)
    s.add_argument("--iters", type=int, default=200)
    s.set_defaults(func=_cmd_baseline_tnn)

    s = sub.add_parser("convert", help="flat CSV ingestion / export")
    s.add_argument("--from-csv", default=None)
    s.add_argument("--to-csv", default=None)
    s.add_argument("--dims", default=None)
    s.add_argument("--out", required=True)
    s.add_argument("--no-normalize", action="store_true")
    s.add_argument("--manifest", default=None)
    s.set_defaults(func=_cmd_convert)

    return parser


def _fail(code, kind, exc):
    detail = str(exc).replace("\n", " ")
    print(f"error code={code} kind={kind} detail={detail!r}", file=sys.stderr)
    return code


def main(argv=None):
    """Entry point returning the exit status (no sys.exit)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except FormatError as exc:
        return _fail(EXIT_FORMAT, "format", exc)
    except FileNotFoundError as exc:
        return _fail(EXIT_IO, "io", exc)
    except OSError as exc:
        return _fail(EXIT_IO, "io", exc)
    except (ValueError, KeyError, FloatingPointError) as exc:
        return _fail(EXIT_CONFIG, "config", exc)


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
