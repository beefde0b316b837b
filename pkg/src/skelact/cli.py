"""Command-line front end: train, detect, eval, synth, and features.

Exit codes: 0 success, 2 usage or input error, 3 numeric or model error.
Configuration comes from an optional key=value file plus flag overrides;
all randomness is seeded from the configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import SkelActError
from .features import sequence_features
from .model_io import load_model, save_model
from .pipeline import (
    MODEL_KINDS,
    RunConfig,
    detect_with_model,
    evaluate_dataset,
    featurize,
    train_location_model,
)
from .skeleton import (
    ManifestEntry,
    load_dataset,
    read_skeleton_frames,
    write_manifest,
    write_skeleton_file,
)
from .synth import build_benchmark_dataset

USAGE_ERROR = 2
MODEL_ERROR = 3

_CONFIG_KEYS = {
    "location": str,
    "use_hog_simple": lambda v: v.lower() in ("1", "true", "yes"),
    "use_hog_skeletal": lambda v: v.lower() in ("1", "true", "yes"),
    "substructure_cap": int,
    "seed": int,
    "self_prob": float,
    "to_neutral": float,
    "neutral_stay": float,
    "smoothing": float,
    "boundary_prior": str,
    "incremental": lambda v: v.lower() in ("1", "true", "yes"),
}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {raw.rstrip()}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = _CONFIG_KEYS[key](value)
    return values


def _build_config(args) -> RunConfig:
    values = _load_config(getattr(args, "config", None))
    for key in _CONFIG_KEYS:
        arg = getattr(args, key, None)
        if arg is not None:
            values[key] = arg
    return RunConfig(**values)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--location", help="location whose activities to model")
    parser.add_argument("--substructure-cap", dest="substructure_cap", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--self-prob", dest="self_prob", type=float)
    parser.add_argument("--to-neutral", dest="to_neutral", type=float)
    parser.add_argument("--neutral-stay", dest="neutral_stay", type=float)
    parser.add_argument("--boundary-prior", dest="boundary_prior",
                        choices=("uniform", "carry"))
    parser.add_argument("--incremental", action="store_const", const=True,
                        default=None, help="cache open windows across frames")
    parser.add_argument("--hog-simple", dest="use_hog_simple",
                        action="store_const", const=True, default=None)
    parser.add_argument("--hog-skeletal", dest="use_hog_skeletal",
                        action="store_const", const=True, default=None)


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sequences = build_benchmark_dataset(
        n_subjects=args.subjects,
        reps=args.reps,
        duration_frames=args.frames,
        base_seed=args.seed if args.seed is not None else 0,
    )
    entries = []
    for i, seq in enumerate(sequences):
        name = f"seq{i:04d}.txt"
        write_skeleton_file(out / name, seq.frames)
        entries.append(
            ManifestEntry(
                file=name,
                activity=seq.activity_label,
                location=seq.location,
                subject=seq.subject_id,
            )
        )
    write_manifest(out / "manifest.csv", entries)
    print(f"wrote {len(sequences)} sequences to {out}")
    return 0


def cmd_features(args) -> int:
    with open(args.input, "r", encoding="ascii") as fh:
        frames = read_skeleton_frames(fh)
    feats = sequence_features(frames)
    writer = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for frame, row in zip(frames, feats):
            writer.write(
                str(frame.frame_index)
                + ","
                + ",".join(format(v, ".10g") for v in row)
                + "\n"
            )
    finally:
        if args.out:
            writer.close()
    return 0


def cmd_train(args) -> int:
    config = _build_config(args)
    if not config.location:
        print("error: --location (or a config file setting it) is required",
              file=sys.stderr)
        return USAGE_ERROR
    sequences = load_dataset(args.data, args.manifest)
    model = train_location_model(sequences, config)
    save_model(model, args.out)
    for activity in sorted(model.sample_counts):
        line = f"{activity}: {model.sample_counts[activity]} frames"
        history = model.em_histories.get(activity)
        if history:
            line += f", final EM log-likelihood {history[-1]:.6f}"
        print(line)
    print(f"model written to {args.out}")
    return 0


def cmd_detect(args) -> int:
    model = load_model(args.model_file)
    kind = args.model

    def emit(frame_index: int, label: str, posterior: np.ndarray, states) -> None:
        if args.format == "json":
            sys.stdout.write(
                json.dumps(
                    {
                        "frame_index": frame_index,
                        "activity": label,
                        "posterior": {
                            s: float(p) for s, p in zip(states, posterior)
                        },
                    },
                    sort_keys=True,
                )
                + "\n"
            )
        else:
            sys.stdout.write(
                f"{frame_index},{label},"
                + ",".join(format(p, ".10g") for p in posterior)
                + "\n"
            )
        sys.stdout.flush()

    if args.input == "-":
        return _detect_streaming(model, kind, emit)
    with open(args.input, "r", encoding="ascii") as fh:
        frames = read_skeleton_frames(fh)
    features = sequence_features(frames)
    if features.shape[1] != len(model.standardizer.mean):
        print(
            f"error: model expects {len(model.standardizer.mean)} features, "
            f"got {features.shape[1]}",
            file=sys.stderr,
        )
        return MODEL_ERROR
    labels, posteriors, states = detect_with_model(model, features, kind)
    for frame, label, row in zip(frames, labels, posteriors):
        emit(frame.frame_index, label, row, states)
    return 0


def _detect_streaming(model, kind, emit) -> int:
    """Read frames line by line from stdin, emitting one result per line."""
    from .memm import init_state, structure_step
    from .skeleton import parse_frame
    from .features import MOTION_BUFFER, frame_features

    history = []
    state = init_state(model.tables) if kind == "full" else None
    classes = model.naive.classes
    alpha = np.full(len(classes), 1.0 / len(classes))
    for line in sys.stdin:
        stripped = line.strip()
        if not stripped or stripped.upper() == "END":
            continue
        frame = parse_frame(stripped)
        history.append(frame)
        history = history[-MOTION_BUFFER:]
        x = frame_features(history).concat()
        if kind == "full":
            state, label, posterior = structure_step(
                state,
                x,
                model.bank,
                model.tables,
                cap=model.config.substructure_cap,
                incremental=model.config.incremental,
                boundary_prior=model.config.boundary_prior,
            )
            emit(frame.frame_index, label, posterior, model.tables.states)
        else:
            std = model.standardizer.apply(x[None, :])
            if kind == "naive":
                posterior = model.naive.predict_proba(std)[0]
            else:
                from .baselines import one_level_step

                alpha = one_level_step(
                    alpha, std[0], model.naive, model.one_level_trans
                )
                posterior = alpha
            label = classes[int(np.argmax(posterior))]
            emit(frame.frame_index, label, posterior, classes)
    return 0


def cmd_eval(args) -> int:
    config = _build_config(args)
    sequences = load_dataset(args.data, args.manifest)
    outcome = evaluate_dataset(sequences, args.setting, config, kind=args.model)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for location, matrix in outcome.confusions.items():
        path = out_dir / f"confusion_{location}.csv"
        path.write_text(matrix.to_csv(), encoding="utf-8")
    report_path = out_dir / "metrics.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(outcome.report.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")
    overall = outcome.report.overall
    print(
        f"{args.setting}: overall precision {overall[0]:.3f} "
        f"recall {overall[1]:.3f} -> {report_path}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skelact",
        description="Online activity detection from skeleton streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate the synthetic benchmark dataset")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--subjects", type=int, default=3)
    p_synth.add_argument("--reps", type=int, default=2)
    p_synth.add_argument("--frames", type=int, default=150)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)

    p_feat = sub.add_parser("features", help="dump per-frame feature vectors as CSV")
    p_feat.add_argument("--input", required=True, help="skeleton text file")
    p_feat.add_argument("--out", help="output CSV (default: stdout)")
    p_feat.set_defaults(func=cmd_features)

    p_train = sub.add_parser("train", help="train a per-location model")
    p_train.add_argument("--data", required=True, help="dataset directory")
    p_train.add_argument("--manifest", help="manifest CSV (default: data/manifest.csv)")
    p_train.add_argument("--out", required=True, help="model file to write")
    _add_config_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_detect = sub.add_parser("detect", help="label a skeleton stream per frame")
    p_detect.add_argument("model_file", help="trained model JSON")
    p_detect.add_argument("input", help="skeleton text file, or - for stdin")
    p_detect.add_argument("--model", choices=MODEL_KINDS, default="full")
    p_detect.add_argument("--format", choices=("csv", "json"), default="csv")
    p_detect.set_defaults(func=cmd_detect)

    p_eval = sub.add_parser("eval", help="run a cross-validation protocol")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--manifest")
    p_eval.add_argument("--setting", choices=("new_person", "have_seen"),
                        required=True)
    p_eval.add_argument("--out-dir", required=True)
    p_eval.add_argument("--model", choices=MODEL_KINDS, default="full")
    _add_config_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except SkelActError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return MODEL_ERROR


if __name__ == "__main__":
    sys.exit(main())
