"""Run configuration: strict JSON schema, defaults, and provenance hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema

from .ar_features import MAX_FEATURES, MIN_FEATURES
from .kernels import DEFAULT_ANGLE_SCALE, KERNEL_NAMES, KernelConfig
from .ocsvm import DEFAULT_NU
from .synth import DatasetConfig

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "regime": {"type": "string", "enum": ["OBD", "M4W", "obd", "m4w"]},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "segment_seconds": {"type": "number", "exclusiveMinimum": 0},
        "sample_rate_hz": {"type": "integer", "minimum": 1},
        "n_normal_segments": {"type": "integer", "minimum": 1},
        "n_anomaly_segments_per_type": {"type": "integer", "minimum": 1},
        "anomaly_snr_db": {"type": ["number", "null"]},
        "d_range": {
            "type": "array",
            "items": {"type": "integer", "minimum": MIN_FEATURES, "maximum": MAX_FEATURES},
            "minItems": 2,
            "maxItems": 2,
        },
        "kernels": {
            "type": "array",
            "items": {"type": "string", "enum": list(KERNEL_NAMES)},
            "minItems": 1,
            "uniqueItems": True,
        },
        "layers": {"type": "integer", "minimum": 1},
        "nu": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "gamma": {"oneOf": [{"const": "auto"}, {"type": "number", "exclusiveMinimum": 0}]},
        "angle_scale": {"type": "number", "exclusiveMinimum": 0},
        "n_train": {"type": "integer", "minimum": 1},
        "paths": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "data": {"type": "string"},
                "out": {"type": "string"},
            },
        },
    },
}


@dataclass(frozen=True)
class RunConfig:
    regime: str = "OBD"
    seed: int = 7
    segment_seconds: float = 10.0
    sample_rate_hz: int = 16000
    n_normal_segments: int = 30
    n_anomaly_segments_per_type: int = 10
    anomaly_snr_db: float | None = None
    d_range: tuple = (MIN_FEATURES, MAX_FEATURES)
    kernels: tuple = KERNEL_NAMES
    layers: int = 2
    nu: float = DEFAULT_NU
    gamma: float | str = "auto"
    angle_scale: float = DEFAULT_ANGLE_SCALE
    n_train: int = 20
    paths: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "regime", self.regime.upper())
        object.__setattr__(self, "d_range", tuple(self.d_range))
        object.__setattr__(self, "kernels", tuple(k.lower() for k in self.kernels))
        lo, hi = self.d_range
        if lo > hi:
            raise ValueError(f"d_range lower bound {lo} exceeds upper bound {hi}")

    @property
    def d_values(self) -> list[int]:
        return list(range(self.d_range[0], self.d_range[1] + 1))

    def kernel_configs(self) -> list[KernelConfig]:
        gamma = None if self.gamma == "auto" else float(self.gamma)
        return [KernelConfig(k, self.layers, gamma, self.angle_scale) for k in self.kernels]

    def dataset_config(self) -> DatasetConfig:
        return DatasetConfig(
            regime=self.regime,
            seed=self.seed,
            sample_rate_hz=self.sample_rate_hz,
            segment_seconds=self.segment_seconds,
            n_normal_segments=self.n_normal_segments,
            n_anomaly_segments_per_type=self.n_anomaly_segments_per_type,
            anomaly_snr_db=self.anomaly_snr_db,
        )

    def to_dict(self, include_paths: bool = True) -> dict:
        d = {
            "regime": self.regime,
            "seed": self.seed,
            "segment_seconds": self.segment_seconds,
            "sample_rate_hz": self.sample_rate_hz,
            "n_normal_segments": self.n_normal_segments,
            "n_anomaly_segments_per_type": self.n_anomaly_segments_per_type,
            "anomaly_snr_db": self.anomaly_snr_db,
            "d_range": list(self.d_range),
            "kernels": list(self.kernels),
            "layers": self.layers,
            "nu": self.nu,
            "gamma": self.gamma,
            "angle_scale": self.angle_scale,
            "n_train": self.n_train,
        }
        if include_paths:
            d["paths"] = dict(self.paths)
        return d

    def hash(self) -> str:
        """Content hash of every setting that can change results (paths excluded)."""
        return config_hash(self.to_dict(include_paths=False))

    def with_overrides(self, **kwargs) -> RunConfig:
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        if not kwargs:
            return self
        merged = self.to_dict()
        merged.update(kwargs)
        validate(merged)
        return replace(self, **kwargs)


def config_hash(params: dict) -> str:
    canonical = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def validate(data: dict) -> None:
    """Raise ``ValueError`` on any schema violation, including unknown keys."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValueError(f"config {where}: {exc.message}") from None


def from_dict(data: dict) -> RunConfig:
    validate(data)
    return RunConfig(**data)


def load(path) -> RunConfig:
    path = Path(path)
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from None
    cfg = from_dict(data)
    # Relative paths are taken relative to the config file.
    paths = {k: str((path.parent / v)) if not Path(v).is_absolute() else v
             for k, v in cfg.paths.items()}
    return replace(cfg, paths=paths)
