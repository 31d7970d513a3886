"""Command-line interface.

Subcommands cover the pipeline stages (synth, recover, music), single trials,
scaling sweeps and the comparison studies. Every output file carries a header
line (or JSON field) with a hash of the full configuration for provenance.

Exit codes: 0 success, 2 validation error, 3 solver divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .harness import (
    TrialSpec,
    compare_fft,
    compare_init,
    config_hash,
    fit_power_law,
    overlap_study,
    rebin,
    run_trial,
    sweep_scaling,
)
from .model import (
    SampledSignal,
    TimeGrid,
    load_signal_csv,
    load_spectrum,
    save_signal_csv,
    synthesize,
)
from .music import detect_frequencies, save_imaging_csv
from .solver import (
    RecoveryConfig,
    SolverDivergedError,
    init_default,
    recover,
    save_trace_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGED = 3


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict, chash: str) -> None:
    payload = dict(payload)
    payload["config_hash"] = chash
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def cmd_synth(args) -> int:
    spectrum = load_spectrum(args.spectrum)
    grid = TimeGrid(n_pos=args.n_pos, dt=args.dt, symmetric=args.symmetric)
    values = synthesize(spectrum, grid)
    signal = SampledSignal(
        grid=grid, sample_indices=grid.indices(), values=values,
        shots_per_sample=1, noise_kind="exact",
    )
    chash = config_hash({"cmd": "synth", "spectrum": spectrum.to_dict(),
                         "n_pos": args.n_pos, "dt": args.dt,
                         "symmetric": args.symmetric, "seed": args.seed})
    out = _out_dir(args) / "signal.csv"
    save_signal_csv(signal, out, header_comment=f"config={chash}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_recover(args) -> int:
    samples = load_signal_csv(args.signal)
    config = RecoveryConfig.from_dict(json.load(open(args.config))) if args.config \
        else RecoveryConfig()
    config.record_trace = True
    if not samples.grid.symmetric:
        from .model import extend_hermitian
        samples = extend_hermitian(samples)
    init = init_default(samples, samples.grid)
    result = recover(samples, init, config)
    chash = config_hash({"cmd": "recover", "config": config.to_dict(),
                         "signal": str(args.signal), "seed": args.seed})
    out = _out_dir(args)
    path = out / "recovered.csv"
    with open(path, "w") as fh:
        fh.write(f"# config={chash}\n")
        fh.write(f"# n_pos={samples.grid.n_pos} dt={samples.grid.dt!r} "
                 f"symmetric={int(samples.grid.symmetric)} shots={samples.shots_per_sample} "
                 f"noise={samples.noise_kind}\n")
        fh.write("index,t,re,im\n")
        for n, v in zip(samples.grid.indices(), result.x_star):
            fh.write(f"{n},{n * samples.grid.dt},{v.real!r},{v.imag!r}\n")
    save_trace_csv(result.trace, out / "trace.csv", header_comment=f"config={chash}")
    print(f"wrote {path} ({result.iterations_used} iterations, "
          f"converged={result.converged})")
    return EXIT_OK


def cmd_music(args) -> int:
    signal = load_signal_csv(args.signal)
    imaging = detect_frequencies(signal.values, args.s, oversample=args.oversample)
    chash = config_hash({"cmd": "music", "s": args.s, "oversample": args.oversample,
                         "signal": str(args.signal), "seed": args.seed})
    out = _out_dir(args)
    save_imaging_csv(imaging, out / "imaging.csv", header_comment=f"config={chash}")
    _write_json(out / "peaks.json", {
        "frequencies": [float(f) for f in imaging.refined],
        "peaks": [{"omega": w, "J": j} for w, j in imaging.peaks],
        "under_resolved": imaging.under_resolved,
    }, chash)
    print(f"wrote {out / 'peaks.json'}")
    return EXIT_OK


def _load_trial_spec(path, seed_override=None) -> TrialSpec:
    d = json.load(open(path))
    if seed_override is not None:
        d["seed"] = seed_override
    return TrialSpec.from_dict(d)


def cmd_trial(args) -> int:
    spec = _load_trial_spec(args.spec, args.seed)
    res = run_trial(spec)
    chash = config_hash({"cmd": "trial", "spec": spec.to_dict()})
    out = _out_dir(args)
    _write_json(out / "trial.json", res.to_dict(), chash)
    print(f"wrote {out / 'trial.json'} mean_error={res.mean_error:.3e}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    d = json.load(open(args.spec))
    base = TrialSpec.from_dict(d["base"])
    if args.seed is not None:
        base.seed = args.seed
    sweep = sweep_scaling(
        base, d["n_pos_list"], repeats=d.get("repeats", 5),
        x_axis=d.get("x_axis", "runtime"), n_bins=d.get("n_bins", 20),
    )
    fit = fit_power_law(sweep.binned.bin_centers, sweep.binned.means)
    chash = config_hash({"cmd": "sweep", "spec": d})
    out = _out_dir(args)
    with open(out / "raw.csv", "w") as fh:
        fh.write(f"# config={chash}\n")
        cols = list(sweep.raw[0].keys())
        fh.write(",".join(cols) + "\n")
        for row in sweep.raw:
            fh.write(",".join(repr(row[c]) for c in cols) + "\n")
    with open(out / "binned.csv", "w") as fh:
        fh.write(f"# config={chash}\n")
        fh.write("bin_center,mean,std,count\n")
        b = sweep.binned
        for c, mn, sd, ct in zip(b.bin_centers, b.means, b.stds, b.counts):
            fh.write(f"{c!r},{mn!r},{sd!r},{ct}\n")
    _write_json(out / "fit.json",
                {"a": fit.a, "b": fit.b, "r2": fit.r2, "x_axis": sweep.x_axis},
                chash)
    print(f"wrote {out / 'fit.json'} b={fit.b:.3f} r2={fit.r2:.3f}")
    return EXIT_OK


def cmd_compare_init(args) -> int:
    spec = _load_trial_spec(args.spec, args.seed)
    cmp = compare_init(spec)
    chash = config_hash({"cmd": "compare-init", "spec": spec.to_dict()})
    out = _out_dir(args)
    _write_json(out / "compare_init.json", {
        "pii": cmp.pii.to_dict(),
        "default": cmp.default.to_dict(),
    }, chash)
    if cmp.pii.trace:
        save_trace_csv(cmp.pii.trace, out / "trace_pii.csv", header_comment=f"config={chash}")
    if cmp.default.trace:
        save_trace_csv(cmp.default.trace, out / "trace_default.csv", header_comment=f"config={chash}")
    print(f"wrote {out / 'compare_init.json'}")
    return EXIT_OK


def cmd_compare_fft(args) -> int:
    spec = _load_trial_spec(args.spec, args.seed)
    rows = compare_fft(spec)
    chash = config_hash({"cmd": "compare-fft", "spec": spec.to_dict()})
    out = _out_dir(args)
    if args.format == "csv":
        with open(out / "compare_fft.csv", "w") as fh:
            fh.write(f"# config={chash}\n")
            fh.write("truth,music,music_error,fft,fft_error\n")
            for r in rows:
                fh.write(f"{r['truth']!r},{r['music']!r},{r['music_error']!r},"
                         f"{r['fft']!r},{r['fft_error']!r}\n")
        print(f"wrote {out / 'compare_fft.csv'}")
    else:
        _write_json(out / "compare_fft.json", {"rows": rows}, chash)
        print(f"wrote {out / 'compare_fft.json'}")
    return EXIT_OK


def cmd_overlap(args) -> int:
    spec = _load_trial_spec(args.spec, args.seed)
    weights = [float(w) for w in args.weights.split(",")]
    rows = overlap_study(spec, weights, n_background=args.n_background)
    chash = config_hash({"cmd": "overlap", "spec": spec.to_dict(),
                         "weights": weights, "n_background": args.n_background})
    out = _out_dir(args)
    _write_json(out / "overlap.json", {"rows": rows}, chash)
    print(f"wrote {out / 'overlap.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="sparsefreq", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", parents=[common], help="spectrum JSON -> signal CSV")
    ps.add_argument("spectrum")
    ps.add_argument("--n-pos", type=int, required=True, dest="n_pos")
    ps.add_argument("--dt", type=float, default=1.0)
    ps.add_argument("--symmetric", action="store_true")
    ps.set_defaults(func=cmd_synth)

    pr = sub.add_parser("recover", parents=[common],
                        help="signal CSV + config JSON -> recovered CSV + trace CSV")
    pr.add_argument("signal")
    pr.add_argument("--config", default=None)
    pr.set_defaults(func=cmd_recover)

    pm = sub.add_parser("music", parents=[common],
                        help="recovered CSV -> imaging CSV + peaks JSON")
    pm.add_argument("signal")
    pm.add_argument("-s", type=int, required=True, help="model order")
    pm.add_argument("--oversample", type=int, default=100)
    pm.set_defaults(func=cmd_music)

    pt = sub.add_parser("trial", parents=[common], help="TrialSpec JSON -> TrialResult JSON")
    pt.add_argument("spec")
    pt.set_defaults(func=cmd_trial)

    pw = sub.add_parser("sweep", parents=[common],
                        help="sweep spec JSON -> binned CSV + raw CSV + fit JSON")
    pw.add_argument("spec")
    pw.set_defaults(func=cmd_sweep)

    pc = sub.add_parser("compare-init", parents=[common], help="paired PII/default trial")
    pc.add_argument("spec")
    pc.set_defaults(func=cmd_compare_init)

    pf = sub.add_parser("compare-fft", parents=[common], help="MUSIC vs FFT error table")
    pf.add_argument("spec")
    pf.set_defaults(func=cmd_compare_fft)

    po = sub.add_parser("overlap", parents=[common], help="error vs target weight study")
    po.add_argument("spec")
    po.add_argument("--weights", default="0.0,0.3,0.5,0.7")
    po.add_argument("--n-background", type=int, default=30, dest="n_background")
    po.set_defaults(func=cmd_overlap)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
