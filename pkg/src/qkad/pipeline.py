"""Feature extraction over datasets and the trained-detector bundle.

A :class:`Detector` is everything needed to score a new segment: the kernel
choice, the scaler fitted on the training rows, the raw training features and
the one-class SVM fitted on their Gram matrix.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import ocsvm
from .ar_features import (
    MAX_FEATURES,
    Scaler,
    apply_scaler,
    autocorrelation,
    check_feature_count,
    fit_scaler,
    levinson_durbin,
)
from .kernels import KernelConfig, kernel_matrix
from .synth import NORMAL, LabeledSegment

DEFAULT_N_TRAIN = 20


def autocorrelations(segments: list[LabeledSegment], max_lag: int = MAX_FEATURES) -> np.ndarray:
    """Autocorrelation lags 0..max_lag of every segment, one row per segment."""
    return np.array([autocorrelation(s.signal, max_lag) for s in segments])


def features_from_autocorrelations(R: np.ndarray, d: int) -> np.ndarray:
    """AR(d) coefficients for every row of precomputed autocorrelations."""
    d = check_feature_count(d)
    return np.array([levinson_durbin(r[:d + 1], d).coefficients for r in R])


def dataset_features(segments: list[LabeledSegment], d: int) -> np.ndarray:
    return features_from_autocorrelations(autocorrelations(segments, d), d)


def train_test_split(labels: list[str], n_train: int = DEFAULT_N_TRAIN) -> tuple[list[int], list[int]]:
    """First ``n_train`` normal segments train; everything else tests.

    Order follows the dataset (manifest) order.
    """
    normal_idx = [i for i, lab in enumerate(labels) if lab == NORMAL]
    if len(normal_idx) < n_train:
        raise ValueError(f"need {n_train} normal segments for training, found {len(normal_idx)}")
    train = normal_idx[:n_train]
    chosen = set(train)
    test = [i for i in range(len(labels)) if i not in chosen]
    return train, test


def features_ref(features: np.ndarray) -> str:
    """Content hash identifying a training feature set."""
    data = np.ascontiguousarray(features, dtype="<f8").tobytes()
    return "sha256:" + hashlib.sha256(data).hexdigest()


@dataclass
class Detector:
    kernel: KernelConfig
    scaler: Scaler
    training_features: np.ndarray
    model: ocsvm.OcSvmModel

    @property
    def n_features(self) -> int:
        return self.training_features.shape[1]

    def scaled_training(self) -> np.ndarray:
        return apply_scaler(self.scaler, self.training_features)

    def kernel_rows(self, scaled_points, threads: int | None = None) -> np.ndarray:
        return kernel_matrix(self.kernel, scaled_points, self.scaled_training(), threads=threads)

    def decision_scaled(self, scaled_points, threads: int | None = None) -> np.ndarray:
        return ocsvm.decision_batch(self.model, self.kernel_rows(scaled_points, threads))

    def decision(self, raw_features, threads: int | None = None) -> np.ndarray:
        """Decision scores for raw (unscaled) feature rows."""
        raw = np.atleast_2d(np.asarray(raw_features, dtype=float))
        return self.decision_scaled(apply_scaler(self.scaler, raw), threads)

    def to_dict(self) -> dict:
        m = self.model
        return {
            "nu": m.nu,
            "alphas": m.dual_weights.tolist(),
            "rho": m.rho,
            "support_indices": [int(i) for i in m.support_indices],
            "kernel_config": self.kernel.to_dict(),
            "scaler": self.scaler.to_dict(),
            "training_features": self.training_features.tolist(),
            "training_feature_ref": m.training_feature_ref,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Detector:
        feats = np.array(data["training_features"], dtype=float)
        alphas = np.array(data["alphas"], dtype=float)
        if feats.shape[0] != alphas.size:
            raise ValueError("model has mismatched alphas and training features")
        model = ocsvm.OcSvmModel(
            nu=float(data["nu"]),
            dual_weights=alphas,
            rho=float(data["rho"]),
            support_indices=np.array(data["support_indices"], dtype=int),
            training_feature_ref=data.get("training_feature_ref") or features_ref(feats),
        )
        return cls(
            kernel=KernelConfig.from_dict(data["kernel_config"]),
            scaler=Scaler.from_dict(data["scaler"]),
            training_features=feats,
            model=model,
        )


def fit_detector(training_features, kernel: KernelConfig, nu: float = ocsvm.DEFAULT_NU,
                 threads: int | None = None) -> Detector:
    feats = np.atleast_2d(np.asarray(training_features, dtype=float))
    scaler = fit_scaler(feats)
    gram = kernel_matrix(kernel, apply_scaler(scaler, feats), threads=threads)
    model = ocsvm.train(gram, nu, feature_ref=features_ref(feats))
    return Detector(kernel, scaler, feats, model)
