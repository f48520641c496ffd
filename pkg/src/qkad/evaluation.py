"""Metrics, the feature-count sweep and decision-surface grids.

Anomaly is the positive class throughout; a score below zero predicts anomaly.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ocsvm
from .ar_features import CLIP_HIGH, CLIP_LOW, MAX_FEATURES, MIN_FEATURES, apply_scaler, check_feature_count
from .kernels import KernelConfig
from .pipeline import (
    DEFAULT_N_TRAIN,
    Detector,
    autocorrelations,
    features_from_autocorrelations,
    fit_detector,
    train_test_split,
)
from .stats import TTestResult, paired_t_test  # noqa: F401  (re-exported)
from .synth import NORMAL, LabeledSegment

SWEEP_FIELDS = ["regime", "kernel", "d", "accuracy", "f1"]


def _is_anomaly(label) -> bool:
    if isinstance(label, str):
        return label != NORMAL
    return bool(label)


@dataclass
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    f1: float
    precision: float
    recall: float
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "accuracy": self.accuracy, "f1": self.f1,
            "precision": self.precision, "recall": self.recall,
            "provenance": self.provenance,
        }


def metrics(labels, scores, provenance: dict | None = None) -> EvalReport:
    """Confusion counts, accuracy and F1 from labels and decision scores.

    ``labels`` may be booleans/ints (truthy = anomaly) or label strings
    (anything other than ``"normal"`` is an anomaly).
    """
    labels = list(labels)
    scores = np.asarray(scores, dtype=float)
    if len(labels) == 0:
        raise ValueError("metrics need at least one labelled score")
    if len(labels) != scores.size:
        raise ValueError(f"{len(labels)} labels but {scores.size} scores")
    truth = np.array([_is_anomaly(lab) for lab in labels])
    pred = scores < 0
    tp = int(np.sum(truth & pred))
    fp = int(np.sum(~truth & pred))
    tn = int(np.sum(~truth & ~pred))
    fn = int(np.sum(truth & ~pred))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(
        tp=tp, fp=fp, tn=tn, fn=fn,
        accuracy=(tp + tn) / len(labels),
        f1=f1, precision=precision, recall=recall,
        provenance=dict(provenance or {}),
    )


# --- sweep --------------------------------------------------------------------

@dataclass
class SweepResult:
    regime: str
    d_values: list[int]
    kernels: list[str]
    cells: dict  # (kernel name, d) -> EvalReport
    provenance: dict = field(default_factory=dict)

    def series(self, kernel: str, metric: str = "f1") -> list[float]:
        return [getattr(self.cells[(kernel, d)], metric) for d in self.d_values]

    def rows(self) -> list[dict]:
        return [
            {"regime": self.regime, "kernel": k, "d": d,
             "accuracy": self.cells[(k, d)].accuracy, "f1": self.cells[(k, d)].f1}
            for k in self.kernels for d in self.d_values
        ]

    def to_csv(self, comment: str | None = None) -> str:
        buf = io.StringIO()
        if comment:
            buf.write(f"# {comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_FIELDS)
        for row in self.rows():
            w.writerow([row["regime"], row["kernel"], row["d"], repr(row["accuracy"]), repr(row["f1"])])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "d_values": self.d_values,
            "kernels": self.kernels,
            "cells": [
                {"kernel": k, "d": d, **self.cells[(k, d)].to_dict()}
                for k in self.kernels for d in self.d_values
            ],
            "provenance": self.provenance,
        }


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        if reader.fieldnames != SWEEP_FIELDS:
            raise ValueError(f"{path}: expected columns {SWEEP_FIELDS}, got {reader.fieldnames}")
        return [
            {"regime": r["regime"], "kernel": r["kernel"], "d": int(r["d"]),
             "accuracy": float(r["accuracy"]), "f1": float(r["f1"])}
            for r in reader
        ]


def check_d_range(d_values) -> list[int]:
    d_values = [check_feature_count(d) for d in d_values]
    if not d_values:
        raise ValueError("empty feature-count range")
    return d_values


def sweep(segments: list[LabeledSegment], kernels: list[KernelConfig],
          d_range=range(MIN_FEATURES, MAX_FEATURES + 1), nu: float = ocsvm.DEFAULT_NU,
          n_train: int = DEFAULT_N_TRAIN, threads: int | None = None,
          provenance: dict | None = None) -> SweepResult:
    """Evaluate every (kernel, d) cell with the fixed train/test split.

    For each feature count d the segments are reduced to AR(d) coefficients,
    the scaler and one-class SVM are fit on the training normals and the
    test segments are scored.
    """
    d_values = check_d_range(list(d_range))
    if not segments:
        raise ValueError("empty dataset")
    labels = [s.label for s in segments]
    train_idx, test_idx = train_test_split(labels, n_train)
    test_labels = [labels[i] for i in test_idx]
    R = autocorrelations(segments, max(d_values))
    feats = {d: features_from_autocorrelations(R, d) for d in d_values}

    def run(cell):
        kcfg, d = cell
        det = fit_detector(feats[d][train_idx], kcfg, nu)
        scores = det.decision(feats[d][test_idx])
        prov = {"kernel": kcfg.to_dict(), "d": d, "nu": nu}
        if kcfg.name == "rbf":
            prov["gamma"] = kcfg.resolved_gamma(d)
        return (kcfg.name, d), metrics(test_labels, scores, prov)

    cells_todo = [(k, d) for k in kernels for d in d_values]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(run, cells_todo))
    else:
        done = [run(c) for c in cells_todo]
    regimes = sorted({str(getattr(s.regime, "value", s.regime)) for s in segments})
    return SweepResult(
        regime="+".join(regimes),
        d_values=d_values,
        kernels=[k.name for k in kernels],
        cells=dict(done),
        provenance={
            "nu": nu, "n_train": len(train_idx), "n_test": len(test_idx),
            "test_anomalies": sum(_is_anomaly(lab) for lab in test_labels),
            **(provenance or {}),
        },
    )


# --- decision grid --------------------------------------------------------------

@dataclass
class DecisionGrid:
    d1: int
    d2: int
    x_values: np.ndarray
    y_values: np.ndarray
    fixed: np.ndarray
    scores: np.ndarray  # shape (len(y_values), len(x_values))
    overlay: list = field(default_factory=list)

    @property
    def score_min(self) -> float:
        return float(self.scores.min())

    @property
    def score_max(self) -> float:
        return float(self.scores.max())

    @property
    def score_range(self) -> float:
        return self.score_max - self.score_min

    def to_csv(self, comment: str | None = None) -> str:
        buf = io.StringIO()
        if comment:
            buf.write(f"# {comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "score"])
        for iy, y in enumerate(self.y_values):
            for ix, x in enumerate(self.x_values):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(self.scores[iy, ix]))])
        return buf.getvalue()

    def sidecar(self) -> dict:
        return {
            "d1": self.d1,
            "d2": self.d2,
            "bounds": [[float(self.x_values[0]), float(self.x_values[-1])],
                       [float(self.y_values[0]), float(self.y_values[-1])]],
            "resolution": [len(self.x_values), len(self.y_values)],
            "fixed_features": self.fixed.tolist(),
            "score_min": self.score_min,
            "score_max": self.score_max,
            "samples": self.overlay,
        }


def decision_grid(detector: Detector, d1: int = 0, d2: int = 1, resolution: int = 50,
                  bounds=None, samples=None, threads: int | None = None) -> DecisionGrid:
    """Decision scores over a 2-D slice of the scaled feature space.

    Features other than ``d1`` and ``d2`` are held at the training mean (in
    scaled coordinates). ``bounds`` defaults to the scaler's clip window,
    ``[-pi/2, 3pi/2]`` on both axes. ``samples`` is an optional list of
    ``(raw_features, label)`` pairs projected onto the plane as an overlay.
    """
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError(f"grid resolution must be at least 2, got {resolution}")
    d = detector.n_features
    if not (0 <= d1 < d and 0 <= d2 < d and d1 != d2):
        raise ValueError(f"axes ({d1}, {d2}) invalid for {d} features")
    if bounds is None:
        bounds = ((CLIP_LOW, CLIP_HIGH), (CLIP_LOW, CLIP_HIGH))
    xs = np.linspace(bounds[0][0], bounds[0][1], nx)
    ys = np.linspace(bounds[1][0], bounds[1][1], ny)
    fixed = detector.scaled_training().mean(axis=0)

    gx, gy = np.meshgrid(xs, ys)
    points = np.tile(fixed, (gx.size, 1))
    points[:, d1] = gx.ravel()
    points[:, d2] = gy.ravel()
    scores = detector.decision_scaled(points, threads).reshape(ny, nx)
    if not np.all(np.isfinite(scores)):
        raise ArithmeticError("non-finite decision scores on grid")

    overlay = []
    for raw, label in samples or []:
        scaled = apply_scaler(detector.scaler, raw)
        overlay.append({
            "x": float(scaled[d1]),
            "y": float(scaled[d2]),
            "label": label if isinstance(label, str) else ("anomaly" if label else NORMAL),
            "score": float(detector.decision(raw)[0]),
        })
    return DecisionGrid(d1, d2, xs, ys, fixed, scores, overlay)


def load_json(path) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from None


def dumps(obj) -> str:
    """Canonical JSON used for every artifact: sorted keys, fixed indent."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


