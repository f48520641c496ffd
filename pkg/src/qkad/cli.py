"""Command-line entry point: ``qkad <subcommand> [options]``.

Subcommands follow the pipeline stages: synth, features, train, score,
sweep, ttest, grid. Every artifact carries a ``config_hash`` and ``seed``.

Exit codes: 0 success, 1 validation or file error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as config_mod, evaluation, pipeline, synth
from .ar_features import (
    extract_features,
    read_features_csv,
    read_signal,
    segment,
    write_features_csv,
)
from .errors import NumericalError
from .kernels import KernelConfig

log = logging.getLogger("qkad")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("QKAD_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"QKAD_THREADS must be an integer, got {env!r}") from None
    return None


def _run_config(args) -> config_mod.RunConfig:
    cfg = config_mod.load(args.config) if args.config else config_mod.RunConfig()
    overrides = {}
    for flag, key in [("seed", "seed"), ("segment_seconds", "segment_seconds"),
                      ("layers", "layers"), ("nu", "nu"), ("gamma", "gamma"),
                      ("angle_scale", "angle_scale"), ("n_train", "n_train")]:
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "regime", None):
        overrides["regime"] = args.regime.upper()
    if getattr(args, "d_range", None):
        overrides["d_range"] = list(args.d_range)
    if getattr(args, "kernels", None):
        overrides["kernels"] = [k.lower() for k in args.kernels]
    if isinstance(overrides.get("gamma"), str) and overrides["gamma"] != "auto":
        overrides["gamma"] = float(overrides["gamma"])
    return cfg.with_overrides(**overrides)


def _provenance(cfg: config_mod.RunConfig, command: str, **extra) -> dict:
    params = {**cfg.to_dict(include_paths=False), "command": command, **extra}
    return {
        "command": command,
        "config_hash": config_mod.config_hash(params),
        "seed": cfg.seed,
        "qkad_version": __version__,
        **extra,
    }


def _comment(prov: dict) -> str:
    return f"qkad {prov['command']} config_hash={prov['config_hash']} seed={prov['seed']}"


def _write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    log.info("wrote %s", path)


def _manifest_path(args, cfg) -> Path:
    if getattr(args, "manifest", None):
        return Path(args.manifest)
    if "data" in cfg.paths:
        return Path(cfg.paths["data"]) / "manifest.csv"
    raise ValueError("no dataset given: pass --manifest or set paths.data in the config")


def _out_dir(args, cfg, default="out") -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    return Path(cfg.paths.get("out", default))


def _segment_features(args, cfg, segments, d) -> np.ndarray:
    if getattr(args, "features", None):
        feats = read_features_csv(args.features)
        if feats.shape != (len(segments), d):
            raise ValueError(
                f"{args.features}: features of shape {feats.shape} do not match "
                f"{len(segments)} segments x {d} features"
            )
        return feats
    return pipeline.dataset_features(segments, d)


# --- subcommands ---------------------------------------------------------------

def cmd_synth(args) -> int:
    cfg = _run_config(args)
    overrides = {}
    if args.n_normal is not None:
        overrides["n_normal_segments"] = args.n_normal
    if args.n_anomaly is not None:
        overrides["n_anomaly_segments_per_type"] = args.n_anomaly
    if args.snr_db is not None:
        overrides["anomaly_snr_db"] = args.snr_db
    cfg = cfg.with_overrides(**overrides)
    dcfg = cfg.dataset_config()
    out = Path(args.out) if args.out else Path(cfg.paths.get("data", "data"))
    segments = synth.generate(dcfg)
    prov = _provenance(cfg, "synth")
    manifest = synth.write_dataset(segments, dcfg, out, comment=_comment(prov))
    print(f"{len(segments)} segments ({dcfg.regime.value}, seed {dcfg.seed}) -> {manifest}")
    return EXIT_OK


def cmd_features(args) -> int:
    cfg = _run_config(args)
    d = args.d if args.d is not None else cfg.d_range[1]
    if args.input:
        rec = read_signal(args.input, args.sample_rate)
        segs = segment(rec, cfg.segment_seconds)
        feats = np.array([extract_features(s, d) for s in segs])
        prov = _provenance(cfg, "features", d=d, source=Path(args.input).name)
    else:
        manifest = _manifest_path(args, cfg)
        segments = synth.load_dataset(manifest)
        feats = pipeline.dataset_features(segments, d)
        prov = _provenance(cfg, "features", d=d, source=manifest.name)
    out = Path(args.out) if args.out else _out_dir(None, cfg) / f"features_d{d}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_features_csv(out, feats, comment=_comment(prov))
    print(f"{feats.shape[0]} x {d} features -> {out}")
    return EXIT_OK


def _load_split(args, cfg, d):
    segments = synth.load_dataset(_manifest_path(args, cfg))
    feats = _segment_features(args, cfg, segments, d)
    labels = [s.label for s in segments]
    train_idx, test_idx = pipeline.train_test_split(labels, cfg.n_train)
    return segments, feats, labels, train_idx, test_idx


def cmd_train(args) -> int:
    cfg = _run_config(args)
    d = args.d if args.d is not None else cfg.d_range[1]
    gamma = None if cfg.gamma == "auto" else float(cfg.gamma)
    kernel = KernelConfig(args.kernel, cfg.layers, gamma, cfg.angle_scale)
    _, feats, _, train_idx, _ = _load_split(args, cfg, d)
    det = pipeline.fit_detector(feats[train_idx], kernel, cfg.nu, threads=_threads(args))
    body = det.to_dict()
    body["d"] = d
    body["provenance"] = _provenance(cfg, "train", d=d, kernel=kernel.to_dict())
    out = Path(args.out) if args.out else _out_dir(None, cfg) / f"model_{kernel.name}_d{d}.json"
    _write_text(out, evaluation.dumps(body))
    print(f"trained {kernel.name} on {len(train_idx)} normals, "
          f"{len(det.model.support_indices)} support vectors, rho={det.model.rho:.6g} -> {out}")
    return EXIT_OK


def _load_model(path) -> tuple[pipeline.Detector, dict]:
    data = evaluation.load_json(path)
    return pipeline.Detector.from_dict(data), data


def cmd_score(args) -> int:
    cfg = _run_config(args)
    det, data = _load_model(args.model)
    d = det.n_features
    _, feats, labels, _, test_idx = _load_split(args, cfg, d)
    scores = det.decision(feats[test_idx], threads=_threads(args))
    prov = _provenance(cfg, "score", d=d, kernel=det.kernel.to_dict(),
                       model_config_hash=data.get("provenance", {}).get("config_hash"))
    report = evaluation.metrics([labels[i] for i in test_idx], scores, prov)
    body = report.to_dict()
    body["scores"] = [{"index": int(i), "label": labels[i], "score": float(s)}
                      for i, s in zip(test_idx, scores)]
    out = Path(args.out) if args.out else _out_dir(None, cfg) / "report.json"
    _write_text(out, evaluation.dumps(body))
    print(f"accuracy={report.accuracy:.4f} f1={report.f1:.4f} -> {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _run_config(args)
    try:
        manifest = _manifest_path(args, cfg)
    except ValueError:
        manifest = None
    if manifest is not None:
        segments = synth.load_dataset(manifest)
        source = manifest.name
    else:
        segments = synth.generate(cfg.dataset_config())
        source = "generated"
    prov = _provenance(cfg, "sweep", source=source)
    result = evaluation.sweep(
        segments, cfg.kernel_configs(), cfg.d_values, nu=cfg.nu, n_train=cfg.n_train,
        threads=_threads(args), provenance=prov,
    )
    out = _out_dir(args, cfg)
    comment = _comment(prov)
    _write_text(out / "sweep.csv", result.to_csv(comment))
    _write_text(out / "sweep.json", evaluation.dumps(result.to_dict()))
    for k in result.kernels:
        single = evaluation.SweepResult(result.regime, result.d_values, [k], result.cells, result.provenance)
        _write_text(out / f"sweep_{k}.csv", single.to_csv(comment))
    for k in result.kernels:
        f1 = ", ".join(f"{v:.3f}" for v in result.series(k))
        print(f"{result.regime} {k:>3} f1: {f1}")
    return EXIT_OK


def _pick_series(rows, kernel, metric, path):
    kernels = sorted({r["kernel"] for r in rows})
    if kernel is None:
        if len(kernels) != 1:
            raise ValueError(f"{path} holds kernels {kernels}; choose one with --kernel-a/--kernel-b")
        kernel = kernels[0]
    picked = sorted((r for r in rows if r["kernel"] == kernel), key=lambda r: r["d"])
    if not picked:
        raise ValueError(f"{path} has no rows for kernel {kernel!r}")
    return kernel, {r["d"]: r[metric] for r in picked}


def cmd_ttest(args) -> int:
    rows_a = evaluation.read_sweep_csv(args.a)
    rows_b = evaluation.read_sweep_csv(args.b)
    ka, sa = _pick_series(rows_a, args.kernel_a, args.metric, args.a)
    kb, sb = _pick_series(rows_b, args.kernel_b, args.metric, args.b)
    if sorted(sa) != sorted(sb):
        raise ValueError(f"feature counts differ: {sorted(sa)} vs {sorted(sb)}")
    ds = sorted(sa)
    res = evaluation.paired_t_test([sa[d] for d in ds], [sb[d] for d in ds])
    params = {"command": "ttest", "metric": args.metric, "a": [ka, [sa[d] for d in ds]],
              "b": [kb, [sb[d] for d in ds]]}
    seed = _csv_seed(args.a)
    body = {
        **res.to_dict(),
        "metric": args.metric,
        "d_values": ds,
        "a": {"file": Path(args.a).name, "kernel": ka},
        "b": {"file": Path(args.b).name, "kernel": kb},
        "provenance": {"command": "ttest", "config_hash": config_mod.config_hash(params),
                       "seed": seed, "qkad_version": __version__},
    }
    text = evaluation.dumps(body)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _csv_seed(path):
    with open(path) as fh:
        first = fh.readline()
    for tok in first.split():
        if tok.startswith("seed="):
            return int(tok[5:])
    return None


def cmd_grid(args) -> int:
    cfg = _run_config(args)
    det, data = _load_model(args.model)
    samples = []
    try:
        manifest = _manifest_path(args, cfg)
    except ValueError:
        manifest = None
    if manifest is not None:
        segments = synth.load_dataset(manifest)
        feats = pipeline.dataset_features(segments, det.n_features)
        samples = [(f, s.label) for f, s in zip(feats, segments)]
    bounds = None
    if args.bounds:
        x0, x1, y0, y1 = args.bounds
        bounds = ((x0, x1), (y0, y1))
    grid = evaluation.decision_grid(det, args.d1, args.d2, args.resolution, bounds, samples,
                                    threads=_threads(args))
    prov = _provenance(cfg, "grid", d1=args.d1, d2=args.d2, resolution=args.resolution,
                       model_config_hash=data.get("provenance", {}).get("config_hash"))
    prefix = Path(args.out) if args.out else _out_dir(None, cfg) / "grid"
    _write_text(prefix.with_suffix(".csv"), grid.to_csv(_comment(prov)))
    side = grid.sidecar()
    side["provenance"] = prov
    side["kernel"] = det.kernel.to_dict()
    _write_text(prefix.with_suffix(".json"), evaluation.dumps(side))
    print(f"grid {len(grid.x_values)}x{len(grid.y_values)} score range "
          f"[{grid.score_min:.6g}, {grid.score_max:.6g}] -> {prefix}.csv/.json")
    return EXIT_OK


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkad", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qkad {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override its values")
    common.add_argument("--threads", type=int, help="worker cap (default: $QKAD_THREADS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--regime", type=str.upper, choices=["OBD", "M4W"])
    data.add_argument("--seed", type=int)
    data.add_argument("--segment-seconds", type=float)

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--layers", type=int)
    model.add_argument("--nu", type=float)
    model.add_argument("--gamma", help="RBF gamma, or 'auto' for 1/d")
    model.add_argument("--angle-scale", type=float)
    model.add_argument("--n-train", type=int, help="number of leading normal segments used for training")

    p = sub.add_parser("synth", parents=[common, data], help="generate a synthetic dataset")
    p.add_argument("--n-normal", type=int)
    p.add_argument("--n-anomaly", type=int, help="segments per anomaly type")
    p.add_argument("--snr-db", type=float)
    p.add_argument("--out", help="output directory (default: paths.data or ./data)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("features", parents=[common, data], help="AR coefficient features")
    p.add_argument("--manifest")
    p.add_argument("--input", help="a single WAV/CSV recording to segment instead of a manifest")
    p.add_argument("--sample-rate", type=int, default=16000, help="sample rate for CSV input")
    p.add_argument("--d", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", parents=[common, data, model], help="fit a one-class SVM")
    p.add_argument("--manifest")
    p.add_argument("--features", help="precomputed feature CSV aligned with the manifest")
    p.add_argument("--kernel", default="qk1", type=str.lower, choices=["qk1", "qk2", "rbf"])
    p.add_argument("--d", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", parents=[common, data, model], help="score the test split")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest")
    p.add_argument("--features")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sweep", parents=[common, data, model], help="feature-count sweep")
    p.add_argument("--manifest")
    p.add_argument("--kernels", nargs="+", type=str.lower, choices=["qk1", "qk2", "rbf"])
    p.add_argument("--d-range", nargs=2, type=int, metavar=("LO", "HI"))
    p.add_argument("--out", help="output directory (default: paths.out or ./out)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ttest", parents=[common], help="paired t-test between two sweep CSVs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", default="f1", choices=["f1", "accuracy"])
    p.add_argument("--kernel-a")
    p.add_argument("--kernel-b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ttest)

    p = sub.add_parser("grid", parents=[common], help="decision-function grid export")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", help="dataset to overlay on the plane")
    p.add_argument("--d1", type=int, default=0)
    p.add_argument("--d2", type=int, default=1)
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--bounds", nargs=4, type=float, metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--out", help="output prefix; writes PREFIX.csv and PREFIX.json")
    p.set_defaults(func=cmd_grid)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
