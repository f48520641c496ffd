"""Autoregressive coefficient features for audio segments.

A segment is reduced to the coefficients phi_1..phi_d of an AR(d) model
fitted by Levinson-Durbin on the mean-removed, biased autocorrelation. The
intercept is absorbed by mean removal and the innovation variance is not part
of the feature vector.
"""

from __future__ import annotations

import csv
import math
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConditioningError, DegenerateSignalError

MIN_FEATURES = 2
MAX_FEATURES = 10
SCALED_RANGE = math.pi
CLIP_LOW = -math.pi / 2
CLIP_HIGH = 3 * math.pi / 2


@dataclass
class Signal:
    sample_rate_hz: int
    samples: np.ndarray

    def __post_init__(self):
        if int(self.sample_rate_hz) <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("a signal needs a non-empty 1-D sample array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("signal contains non-finite samples")
        self.samples = samples

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass
class ArFit:
    order: int
    coefficients: np.ndarray
    noise_variance: float
    reflection_coefficients: np.ndarray = field(default=None, repr=False)
    # Prediction-error variance after each recursion step, orders 0..p.
    error_variances: np.ndarray = field(default=None, repr=False)


def segment(signal: Signal, segment_seconds: float) -> list[Signal]:
    """Split into consecutive, non-overlapping windows; the remainder is dropped."""
    if not segment_seconds > 0:
        raise ValueError(f"segment length must be positive, got {segment_seconds}")
    length = int(math.floor(segment_seconds * signal.sample_rate_hz))
    if length < 1 or signal.samples.size < length:
        raise ValueError(
            f"signal of {signal.duration:.3f} s is shorter than one {segment_seconds} s segment"
        )
    count = signal.samples.size // length
    return [
        Signal(signal.sample_rate_hz, signal.samples[i * length:(i + 1) * length].copy())
        for i in range(count)
    ]


def autocorrelation(signal: Signal, max_lag: int) -> np.ndarray:
    """Biased, mean-removed autocorrelation r_0..r_max_lag.

    r_k = (1/N) * sum_{t=k}^{N-1} y~_t y~_{t-k}, with y~ = y - mean(y).
    """
    y = signal.samples
    n = y.size
    if max_lag < 0 or max_lag >= n:
        raise ValueError(f"max_lag must be in [0, {n - 1}], got {max_lag}")
    yc = y - y.mean()
    return np.array([np.dot(yc[k:], yc[:n - k]) / n for k in range(max_lag + 1)])


def levinson_durbin(r, p: int) -> ArFit:
    """Solve the Yule-Walker system for AR(p) coefficients.

    Raises:
        DegenerateSignalError: if r_0 <= 0.
        ConditioningError: if a reflection coefficient reaches magnitude 1,
            i.e. the autocorrelation is not positive definite.
    """
    r = np.asarray(r, dtype=float)
    if p < 1:
        raise ValueError(f"order must be >= 1, got {p}")
    if r.size < p + 1:
        raise ValueError(f"need {p + 1} autocorrelation lags for order {p}, got {r.size}")
    if not r[0] > 0:
        raise DegenerateSignalError(f"zero-lag autocorrelation is {r[0]}; signal has no variance")

    phi = np.zeros(p)
    refl = np.zeros(p)
    err = np.zeros(p + 1)
    err[0] = r[0]
    for m in range(1, p + 1):
        acc = r[m] - np.dot(phi[:m - 1], r[m - 1:0:-1])
        k = acc / err[m - 1]
        if not abs(k) < 1.0:
            raise ConditioningError(
                f"reflection coefficient {k:.6g} at order {m}: autocorrelation is not positive definite"
            )
        prev = phi[:m - 1].copy()
        phi[:m - 1] = prev - k * prev[::-1]
        phi[m - 1] = k
        refl[m - 1] = k
        err[m] = err[m - 1] * (1.0 - k * k)
    return ArFit(
        order=p,
        coefficients=phi,
        noise_variance=float(r[0] - np.dot(phi, r[1:p + 1])),
        reflection_coefficients=refl,
        error_variances=err,
    )


def check_feature_count(d: int) -> int:
    if isinstance(d, bool) or int(d) != d or not MIN_FEATURES <= d <= MAX_FEATURES:
        raise ValueError(f"feature count must be an integer in [{MIN_FEATURES}, {MAX_FEATURES}], got {d}")
    return int(d)


def extract_features(seg: Signal, d: int) -> np.ndarray:
    """AR(d) coefficients of one segment."""
    d = check_feature_count(d)
    return levinson_durbin(autocorrelation(seg, d), d).coefficients


@dataclass
class Scaler:
    """Per-feature min-max map onto [0, pi], fitted on training rows only."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        self.minimum = np.asarray(self.minimum, dtype=float)
        self.maximum = np.asarray(self.maximum, dtype=float)
        if self.minimum.shape != self.maximum.shape or self.minimum.ndim != 1:
            raise ValueError("scaler bounds must be 1-D arrays of equal length")
        if np.any(self.maximum < self.minimum):
            raise ValueError("scaler maximum below minimum")

    def to_dict(self) -> dict:
        return {"min": self.minimum.tolist(), "max": self.maximum.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> Scaler:
        return cls(np.array(data["min"], dtype=float), np.array(data["max"], dtype=float))


def fit_scaler(training_features) -> Scaler:
    X = np.asarray(training_features, dtype=float)
    if X.size == 0:
        raise ValueError("cannot fit a scaler on an empty training set")
    X = np.atleast_2d(X)
    return Scaler(X.min(axis=0), X.max(axis=0))


def apply_scaler(scaler: Scaler, x) -> np.ndarray:
    """Map features with the training affine map, then clip to [-pi/2, 3pi/2].

    Works on a single vector or a 2-D batch. Constant training columns map to pi/2.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != scaler.minimum.size:
        raise ValueError(f"expected {scaler.minimum.size} features, got {x.shape[-1]}")
    span = scaler.maximum - scaler.minimum
    degenerate = span == 0
    safe = np.where(degenerate, 1.0, span)
    out = SCALED_RANGE * (x - scaler.minimum) / safe
    out = np.where(degenerate, SCALED_RANGE / 2, out)
    return np.clip(out, CLIP_LOW, CLIP_HIGH)


# --- file formats -----------------------------------------------------------

def read_wav(path) -> Signal:
    """Read 16-bit PCM mono WAV into samples in [-1, 1)."""
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1 or fh.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM mono WAV")
        rate = fh.getframerate()
        raw = fh.readframes(fh.getnframes())
    data = np.frombuffer(raw, dtype="<i2").astype(float) / 32768.0
    return Signal(rate, data)


def write_wav(path, signal: Signal) -> None:
    pcm = np.clip(np.round(signal.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(int(signal.sample_rate_hz))
        fh.writeframes(pcm.tobytes())


def read_signal_csv(path, sample_rate_hz: int) -> Signal:
    """One sample per line; blank lines and ``#`` comments are skipped."""
    values = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                values.append(float(line.split(",")[0]))
    return Signal(sample_rate_hz, np.array(values))


def read_signal(path, sample_rate_hz: int = 16000) -> Signal:
    path = Path(path)
    if path.suffix.lower() == ".wav":
        return read_wav(path)
    return read_signal_csv(path, sample_rate_hz)


def feature_header(d: int) -> list[str]:
    return [f"phi_{i}" for i in range(1, d + 1)]


def write_features_csv(path, features, comment: str | None = None) -> None:
    """One row per segment, header ``phi_1..phi_d``; optional leading ``#`` line."""
    F = np.atleast_2d(np.asarray(features, dtype=float))
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(feature_header(F.shape[1]))
        for row in F:
            w.writerow([repr(float(v)) for v in row])


def read_features_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, body = rows[0], rows[1:]
    if header != feature_header(len(header)):
        raise ValueError(f"{path}: unexpected feature header {header}")
    return np.array([[float(v) for v in r] for r in body], dtype=float).reshape(-1, len(header))
