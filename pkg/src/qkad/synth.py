"""Seeded synthetic recordings standing in for the two test rigs.

OBD (open belt drive): two belt tones with harmonics over low-passed noise;
anomalies add a few loud broadband cracks per segment.

M4W (miniature 4WD track): an amplitude-modulated motor tone with a 5 s lap
period over broadband noise; anomalies are either a click train once per lap
(stick) or a quiet 2-6 kHz scratch once per lap (velcro).

Every segment draws from its own Philox stream spawned from the dataset seed,
so segments can be generated in any order or in parallel with identical output.
Samples are quantized to the 16-bit PCM grid, which makes WAV export lossless.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .ar_features import Signal, read_wav, write_wav

PCM_SCALE = 32768.0
HEADROOM = 0.9
BED_RMS = 0.05
LAP_SECONDS = 5.0
M4W_NOISE_CUTOFF_HZ = (2500.0, 7000.0)
M4W_NOISE_SPREAD_DB = 4.0

NORMAL = "normal"
ANOMALY_1 = "anomaly_type_1"
ANOMALY_2 = "anomaly_type_2"


class Regime(str, Enum):
    OBD = "OBD"
    M4W = "M4W"


DEFAULT_SNR_DB = {Regime.OBD: 12.0, Regime.M4W: 3.0}
_REGIME_CODE = {Regime.OBD: 1, Regime.M4W: 2}


@dataclass(frozen=True)
class DatasetConfig:
    regime: Regime
    seed: int = 7
    sample_rate_hz: int = 16000
    segment_seconds: float = 10.0
    n_normal_segments: int = 30
    n_anomaly_segments_per_type: int = 10
    anomaly_snr_db: float | None = None

    def __post_init__(self):
        if not isinstance(self.regime, Regime):
            object.__setattr__(self, "regime", Regime(str(self.regime).upper()))
        if self.anomaly_snr_db is None:
            object.__setattr__(self, "anomaly_snr_db", DEFAULT_SNR_DB[self.regime])
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.sample_rate_hz <= 0 or self.segment_seconds <= 0:
            raise ValueError("sample rate and segment length must be positive")
        if self.n_normal_segments < 1 or self.n_anomaly_segments_per_type < 1:
            raise ValueError("segment counts must be positive")
        if self.sample_rate_hz < 16000 and self.regime is Regime.M4W:
            raise ValueError("M4W scratch band (2-6 kHz) needs a sample rate of at least 16 kHz")

    @property
    def anomaly_labels(self) -> tuple[str, ...]:
        return (ANOMALY_1,) if self.regime is Regime.OBD else (ANOMALY_1, ANOMALY_2)

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.segment_seconds * self.sample_rate_hz))


@dataclass
class LabeledSegment:
    signal: Signal
    label: str
    regime: Regime
    index: int = 0

    @property
    def is_anomaly(self) -> bool:
        return self.label != NORMAL


# --- building blocks --------------------------------------------------------

def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _harmonic_tone(t, f0, n_harmonics, rolloff, rng):
    out = np.zeros_like(t)
    for k in range(1, n_harmonics + 1):
        amp = rolloff ** (k - 1) * rng.uniform(0.8, 1.2)
        out += amp * np.sin(2 * np.pi * k * f0 * t + rng.uniform(0, 2 * np.pi))
    return out


def _decaying_burst(n, rng, decay_fraction=0.25):
    env = np.exp(-np.arange(n) / max(1.0, decay_fraction * n))
    return rng.standard_normal(n) * env


def _add_at_level(target, start, burst, level_rms):
    stop = min(target.size, start + burst.size)
    piece = burst[:stop - start]
    r = _rms(piece)
    if r > 0:
        target[start:stop] += piece * (level_rms / r)


def _finish(x):
    x = np.clip(x, -HEADROOM, HEADROOM)
    return np.round(x * PCM_SCALE) / PCM_SCALE


# --- regimes ----------------------------------------------------------------

def _obd_bed(cfg, t, rng):
    fs = cfg.sample_rate_hz
    belts = sum(
        _harmonic_tone(t, f * (1 + 0.01 * rng.standard_normal()), 3, 0.6, rng)
        for f in (37.0, 61.0)
    )
    sos = sps.butter(4, 1500.0, btype="low", fs=fs, output="sos")
    noise = sps.sosfilt(sos, rng.standard_normal(t.size))
    noise *= 10 ** (rng.uniform(-2.0, 2.0) / 20) * 0.5 * _rms(belts) / _rms(noise)
    bed = belts + noise
    return bed * (BED_RMS / _rms(bed))


def _obd_crack(cfg, x, rng):
    fs = cfg.sample_rate_hz
    level = BED_RMS * 10 ** (cfg.anomaly_snr_db / 20)
    for _ in range(int(rng.integers(2, 5))):
        n = int(rng.uniform(0.030, 0.060) * fs)
        start = int(rng.integers(0, x.size - n))
        _add_at_level(x, start, _decaying_burst(n, rng), level)


def _m4w_bed(cfg, t, rng):
    fs = cfg.sample_rate_hz
    f_motor = 220.0 * (1 + 0.03 * rng.standard_normal())
    motor = _harmonic_tone(t, f_motor, 4, 0.5, rng)
    lap_phase = rng.uniform(0, 2 * np.pi)
    motor *= 1 + 0.3 * np.sin(2 * np.pi * t / LAP_SECONDS + lap_phase)
    # Rolling noise changes colour and level from lap to lap.
    cutoff = rng.uniform(*M4W_NOISE_CUTOFF_HZ)
    sos = sps.butter(2, cutoff, btype="low", fs=fs, output="sos")
    noise = sps.sosfilt(sos, rng.standard_normal(t.size))
    noise *= 10 ** (rng.uniform(-M4W_NOISE_SPREAD_DB, M4W_NOISE_SPREAD_DB) / 20) * 0.7 * _rms(motor) / _rms(noise)
    bed = motor + noise
    return bed * (BED_RMS / _rms(bed)), lap_phase


def _lap_starts(cfg, lap_phase, track_position):
    # Time within each lap at which the car passes the anomaly section.
    offset = ((track_position - lap_phase / (2 * np.pi)) % 1.0) * LAP_SECONDS
    times = np.arange(offset, cfg.segment_seconds, LAP_SECONDS)
    return (times * cfg.sample_rate_hz).astype(int)


def _m4w_stick(cfg, x, lap_phase, rng):
    fs = cfg.sample_rate_hz
    level = BED_RMS * 10 ** (cfg.anomaly_snr_db / 20)
    click = int(0.004 * fs)
    spacing = int(0.025 * fs)
    for start in _lap_starts(cfg, lap_phase, 0.25):
        for c in range(8):
            s = start + c * spacing
            if s + click <= x.size:
                _add_at_level(x, s, _decaying_burst(click, rng), level)


def _m4w_velcro(cfg, x, lap_phase, rng):
    fs = cfg.sample_rate_hz
    level = BED_RMS * 10 ** (cfg.anomaly_snr_db / 20)
    n = int(0.4 * fs)
    sos = sps.butter(4, (2000.0, 6000.0), btype="bandpass", fs=fs, output="sos")
    window = np.hanning(n)
    for start in _lap_starts(cfg, lap_phase, 0.6):
        if start + n <= x.size:
            scratch = sps.sosfilt(sos, rng.standard_normal(n)) * window
            _add_at_level(x, start, scratch, level)


def _generate_one(cfg: DatasetConfig, label: str, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(cfg.n_samples) / cfg.sample_rate_hz
    if cfg.regime is Regime.OBD:
        x = _obd_bed(cfg, t, rng)
        if label == ANOMALY_1:
            _obd_crack(cfg, x, rng)
    else:
        x, lap_phase = _m4w_bed(cfg, t, rng)
        if label == ANOMALY_1:
            _m4w_stick(cfg, x, lap_phase, rng)
        elif label == ANOMALY_2:
            _m4w_velcro(cfg, x, lap_phase, rng)
    return _finish(x)


def segment_labels(cfg: DatasetConfig) -> list[str]:
    """Labels in dataset order: all normals, then each anomaly type in turn."""
    labels = [NORMAL] * cfg.n_normal_segments
    for lab in cfg.anomaly_labels:
        labels += [lab] * cfg.n_anomaly_segments_per_type
    return labels


def generate_segment(cfg: DatasetConfig, index: int) -> LabeledSegment:
    labels = segment_labels(cfg)
    root = np.random.SeedSequence([int(cfg.seed), _REGIME_CODE[cfg.regime]])
    child = root.spawn(len(labels))[index]
    rng = np.random.Generator(np.random.Philox(child))
    samples = _generate_one(cfg, labels[index], rng)
    return LabeledSegment(Signal(cfg.sample_rate_hz, samples), labels[index], cfg.regime, index)


def generate(cfg: DatasetConfig) -> list[LabeledSegment]:
    return [generate_segment(cfg, i) for i in range(len(segment_labels(cfg)))]


# --- manifest ---------------------------------------------------------------

MANIFEST_FIELDS = ["filename", "regime", "label", "seed", "snr_db"]


def write_dataset(segments: list[LabeledSegment], cfg: DatasetConfig, out_dir,
                  comment: str | None = None) -> Path:
    """Write one WAV per segment plus ``manifest.csv``; returns the manifest path.

    ``comment`` becomes a leading ``#`` line of the manifest (provenance).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_FIELDS)
        for seg in segments:
            name = f"{cfg.regime.value.lower()}_{seg.index:03d}_{seg.label}.wav"
            write_wav(out_dir / name, seg.signal)
            w.writerow([name, cfg.regime.value, seg.label, cfg.seed, repr(float(cfg.anomaly_snr_db))])
    return manifest


def read_manifest(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    for row in rows:
        missing = [f for f in MANIFEST_FIELDS if f not in row]
        if missing:
            raise ValueError(f"{path}: manifest row lacks {missing}")
    return rows


def load_dataset(manifest_path) -> list[LabeledSegment]:
    manifest_path = Path(manifest_path)
    segments = []
    for i, row in enumerate(read_manifest(manifest_path)):
        sig = read_wav(manifest_path.parent / row["filename"])
        segments.append(LabeledSegment(sig, row["label"], Regime(row["regime"].upper()), i))
    return segments


def config_dict(cfg: DatasetConfig) -> dict:
    d = asdict(cfg)
    d["regime"] = cfg.regime.value
    return d
