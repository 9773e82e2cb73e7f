"""Command-line entry point: ``thermprint <subcommand> ...``.

Exit status is 0 on success, 1 when the input is rejected (bad file, bad
value, failed pipeline step) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import bench as benchmod
from .core import ThermprintError, load_sequence, load_vector, save_sequence, save_vector
from .fingerprint import FingerprintConfig, dissipation_time
from .learn import TRAINERS, cross_validate, encode_dataset, evaluate, load_manifest, load_model, save_model
from .learn.features import CONTEXTS, GENDERS, LabeledSample, encode_features
from .pipeline import aligned_configs, analyze_scene, sequence_vector
from .preprocess import PreprocessConfig
from .segment import DEFAULT_PROMINENCE, format_roi_line
from .simulate import fit_cooling, parse_scene, render_scene, with_seed


class UsageError(Exception):
    """Flag values that argparse accepts but that make no sense together."""


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _words(text: str) -> list:
    return [x.strip() for x in text.split(",") if x.strip()]


def _read_text(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _add_preprocess_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("preprocessing")
    g.add_argument("--preprocess-config", metavar="FILE",
                   help="key/value document with preprocessing settings (flags override it)")
    g.add_argument("--dissimilarity-threshold", type=float,
                   help="background jump, as a fraction of 255, that rejects a frame (default 0.2)")
    g.add_argument("--denoise-window", type=int, help="odd median window (default 3)")
    g.add_argument("--norm-floor", type=int, metavar="CK",
                   help="normalization floor in centikelvin (default: ambient)")
    g.add_argument("--norm-ceil", type=int, metavar="CK",
                   help="normalization ceil in centikelvin (default: floor + 2000)")


def _add_fingerprint_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("fingerprint")
    g.add_argument("--fingerprint-config", metavar="FILE",
                   help="key/value document with fingerprint settings (flags override it)")
    g.add_argument("--threshold", type=int, help="hot-pixel intensity threshold (default 26)")
    g.add_argument("--vector-len", type=int, help="vector length L (default 480)")
    g.add_argument("--epsilon", type=float,
                   help="remaining fraction below which the fingerprint is gone (default 0.02)")


def _configs(args):
    pre = (PreprocessConfig.from_text(_read_text(args.preprocess_config))
           if args.preprocess_config else PreprocessConfig())
    fp = (FingerprintConfig.from_text(_read_text(args.fingerprint_config))
          if args.fingerprint_config else FingerprintConfig())
    pre = PreprocessConfig(
        pre.dissimilarity_threshold if args.dissimilarity_threshold is None
        else args.dissimilarity_threshold,
        pre.denoise_window if args.denoise_window is None else args.denoise_window,
        pre.norm_floor_centikelvin if args.norm_floor is None else args.norm_floor,
        pre.norm_ceil_centikelvin if args.norm_ceil is None else args.norm_ceil,
        pre.hot_threshold,
    )
    fp = FingerprintConfig(
        fp.intensity_threshold if args.threshold is None else args.threshold,
        fp.vector_len if args.vector_len is None else args.vector_len,
        fp.dissipated_epsilon if args.epsilon is None else args.epsilon,
    )
    return aligned_configs(pre, fp), fp


def _feature_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--with-context", action="store_true",
                   help="append the one-hot hold context to each vector")
    p.add_argument("--with-gender", action="store_true",
                   help="append the one-hot gender metadata to each vector")


# --- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> None:
    spec = parse_scene(_read_text(args.spec))
    if args.seed is not None:
        spec = with_seed(spec, args.seed)
    n = save_sequence(render_scene(spec), args.out)
    print(f"wrote {args.out} ({spec.n_frames} frames, {n} bytes)")


def cmd_extract(args) -> None:
    pre, fp = _configs(args)
    seq = load_sequence(args.input)
    vec = sequence_vector(seq, pre, fp)
    save_vector(vec, args.out)
    d = dissipation_time(vec, fp.dissipated_epsilon)
    # zeros past the end of the recording are padding, not dissipation
    recorded = min(len(seq), fp.vector_len)
    flag = " still_dissipating" if d.still_dissipating or d.index >= recorded else ""
    print(f"dissipation_time_s {d.seconds:.6g}{flag}")


def cmd_segment(args) -> None:
    pre, fp = _configs(args)
    seq = load_sequence(args.input)
    results = analyze_scene(seq, None, pre, fp, args.prominence)
    os.makedirs(args.out_dir, exist_ok=True)
    lines = []
    for res in results:
        save_vector(res.vector, os.path.join(args.out_dir, f"roi_{res.roi.id}.mdv"))
        lines.append(format_roi_line(res.roi))
    text = "\n".join(lines) + "\n"
    with open(os.path.join(args.out_dir, "rois.txt"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)


def _train_kwargs(args) -> dict:
    kw = {"seed": args.seed if args.seed is not None else 0}
    if args.learner == "forest":
        kw.update(n_trees=args.trees, max_depth=args.max_depth, min_leaf=args.min_leaf,
                  features_per_split=args.features_per_split)
    elif args.learner == "svm":
        kw.update(epochs=args.epochs or 60, learning_rate=args.learning_rate or 0.05,
                  l2=args.l2 if args.l2 is not None else 1e-3)
    else:
        kw.update(hidden_units=args.hidden_units, epochs=args.epochs or 300,
                  learning_rate=args.learning_rate or 0.1,
                  l2=args.l2 if args.l2 is not None else 1e-4)
    return kw


def cmd_train(args) -> None:
    X, y = encode_dataset(load_manifest(args.manifest), args.with_context, args.with_gender)
    model = TRAINERS[args.learner](X, y, **_train_kwargs(args))
    save_model(model, args.out)
    print(f"trained {args.learner} on {len(y)} samples, {len(set(y))} classes -> {args.out}")


def _vector_len(model, args) -> int:
    extra = 3 * args.with_context + 2 * args.with_gender
    n = model.n_features - extra
    if n < 1:
        raise UsageError("model is too small for the requested context/gender features")
    return n


def cmd_predict(args) -> None:
    model = load_model(args.model)
    n = _vector_len(model, args)
    if args.context is not None and not args.with_context:
        raise UsageError("--context needs --with-context")
    if args.gender is not None and not args.with_gender:
        raise UsageError("--gender needs --with-gender")
    if args.sequence:
        if args.with_context or args.with_gender:
            raise UsageError("--sequence cannot supply context or gender features")
        pre, fp = _configs(args)
        for res in analyze_scene(load_sequence(args.sequence), model, pre, fp,
                                 args.prominence, feature_len=n):
            print(f"{format_roi_line(res.roi)} label {res.label}")
        return
    if not args.vectors:
        raise UsageError("give vector files or --sequence")
    rows = []
    for path in args.vectors:
        vec = load_vector(path).resized(n)
        # the label is a placeholder; only the features are used
        sample = LabeledSample(vec, "unknown", args.context, args.gender)
        rows.append(encode_features(sample, args.with_context, args.with_gender))
    for path, label in zip(args.vectors, model.predict(np.stack(rows))):
        print(f"{path}\t{label}")


def cmd_evaluate(args) -> None:
    X, y = encode_dataset(load_manifest(args.manifest), args.with_context, args.with_gender)
    if args.kfold:
        if not args.learner:
            raise UsageError("--kfold needs --learner")
        kw = _train_kwargs(args)
        report = cross_validate(lambda A, b: TRAINERS[args.learner](A, b, **kw), X, y,
                                args.kfold, kw["seed"])
    else:
        if not args.model:
            raise UsageError("give --model or --kfold with --learner")
        report = evaluate(load_model(args.model), X, y)
    sys.stdout.write(report.format() + "\n")


def cmd_bench(args) -> None:
    cfg = benchmod.BenchConfig(
        video_lengths_s=tuple(args.lengths), fps_millihz=args.fps_millihz,
        arrangements=tuple(args.arrangements), modes=tuple(args.modes),
        repetitions=args.repetitions, rng_seed=args.seed if args.seed is not None else 0,
        frame_size=args.frame_size, noise_sigma_c=args.noise_sigma_c)
    table = benchmod.format_table(benchmod.run_bench(cfg))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
    sys.stdout.write(table)


def cmd_calibrate(args) -> None:
    fit = fit_cooling(args.times, args.excesses)
    print(f"tau_s {fit.tau_s:.6f}")
    print(f"threshold_c {fit.threshold_c:.6f}")
    for e, t, p, r in zip(args.excesses, args.times, fit.predicted_s, fit.residuals_s):
        print(f"excess {e:g} measured_s {t:g} predicted_s {p:.3f} residual_s {r:.3f}")
    print(f"max_abs_residual_s {fit.max_abs_residual_s:.3f}")


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermprint", description="Thermal dissipation fingerprints: simulate, extract, classify.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="single source of randomness (scene noise, training, benchmark scenes)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("simulate", parents=[common], help="render a scene document to an MTDF file")
    p.add_argument("--spec", required=True, help="scene key/value document")
    p.add_argument("--out", required=True, help="output MTDF path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", parents=[common], help="single-object dissipation vector from an MTDF file")
    p.add_argument("--in", dest="input", required=True, help="input MTDF path")
    p.add_argument("--out", required=True, help="output MDV1 path")
    _add_preprocess_flags(p)
    _add_fingerprint_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("segment", parents=[common], help="one vector per ROI of a multi-object MTDF file")
    p.add_argument("--in", dest="input", required=True, help="input MTDF path")
    p.add_argument("--out-dir", required=True, help="directory for roi_<id>.mdv and rois.txt")
    p.add_argument("--prominence", type=int, default=DEFAULT_PROMINENCE,
                   help="minimum peak prominence for splitting merged ROIs (default 10)")
    _add_preprocess_flags(p)
    _add_fingerprint_flags(p)
    p.set_defaults(func=cmd_segment)

    def learner_flags(p, required):
        p.add_argument("--learner", choices=sorted(TRAINERS), required=required,
                       help="classifier family")
        p.add_argument("--trees", type=int, default=50, help="forest: number of trees")
        p.add_argument("--max-depth", type=int, default=None, help="forest: depth limit")
        p.add_argument("--min-leaf", type=int, default=1, help="forest: minimum leaf size")
        p.add_argument("--features-per-split", type=int, default=None,
                       help="forest: features tried per split (default sqrt)")
        p.add_argument("--epochs", type=int, default=None, help="svm/mlp: training epochs")
        p.add_argument("--learning-rate", type=float, default=None, help="svm/mlp: step size")
        p.add_argument("--l2", type=float, default=None, help="svm/mlp: weight decay")
        p.add_argument("--hidden-units", type=int, default=16, help="mlp: hidden layer width")

    p = sub.add_parser("train", parents=[common], help="train a classifier from a vector manifest")
    p.add_argument("--manifest", required=True, help="lines of 'path label [context] [gender]'")
    p.add_argument("--out", required=True, help="output model path")
    learner_flags(p, True)
    _feature_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="classify vector files or every ROI of an MTDF file")
    p.add_argument("--model", required=True, help="trained model path")
    p.add_argument("vectors", nargs="*", help="MDV1 vector files")
    p.add_argument("--sequence", help="MTDF file to segment and classify instead")
    p.add_argument("--context", choices=CONTEXTS, help="hold context for vector inputs")
    p.add_argument("--gender", choices=GENDERS, help="gender metadata for vector inputs")
    p.add_argument("--prominence", type=int, default=DEFAULT_PROMINENCE,
                   help="minimum peak prominence for --sequence (default 10)")
    _feature_flags(p)
    _add_preprocess_flags(p)
    _add_fingerprint_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common], help="accuracy and confusion matrix on a manifest")
    p.add_argument("--manifest", required=True, help="lines of 'path label [context] [gender]'")
    p.add_argument("--model", help="trained model to score")
    p.add_argument("--kfold", type=int, default=None,
                   help="stratified k-fold cross-validation of --learner instead")
    learner_flags(p, False)
    _feature_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", parents=[common], help="response-time table for multi-object scenes")
    p.add_argument("--lengths", type=_floats, default=[30.0, 60.0, 90.0, 120.0],
                   help="video lengths in seconds, comma-separated (default 30,60,90,120)")
    p.add_argument("--arrangements", type=_words, default=["A", "B", "C", "D"],
                   help="object groupings, comma-separated from A,B,C,D")
    p.add_argument("--modes", type=_words, default=list(benchmod.MODES),
                   help="dispersed and/or agglomerated, comma-separated")
    p.add_argument("--repetitions", type=int, default=3, help="timed runs per cell (>= 3)")
    p.add_argument("--fps-millihz", type=int, default=30000, help="frame rate (default 30 fps)")
    p.add_argument("--frame-size", type=int, default=40, help="square frame side in pixels")
    p.add_argument("--noise-sigma-c", type=float, default=0.3, help="sensor noise in degC")
    p.add_argument("--out", help="also write the table to this path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("calibrate", parents=[common], help="fit (tau, threshold) to measured dissipation times")
    p.add_argument("--times", type=_floats, required=True, help="seconds, comma-separated")
    p.add_argument("--excesses", type=_floats, required=True,
                   help="initial excess in degC per time, comma-separated")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"thermprint {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ThermprintError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"thermprint {args.command}: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
