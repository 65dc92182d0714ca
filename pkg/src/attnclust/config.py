"""Experiment configuration: flat key=value files with CLI overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .engine import TrainConfig, Variant


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    features: str = ""
    labels: str = ""                 # optional; metrics are skipped without it
    transform_features: str = ""     # PI: path to precomputed counterpart features
    jitter_sigma: float = 0.0        # PI: surrogate transform when no path is given
    variant: str = "baseline"
    clusters: int = 0
    embed_dim: int = 0               # 0 = default min(clusters, D, N-1)
    epochs: int = 50
    ramp_length: int = 10
    learning_rate: float = 0.01
    alpha: float = 1.0
    beta: float = 0.9
    target_update_interval: int = 1
    seed: int = 0
    squared_consistency: bool = True
    out_dir: str = ""
    report_format: str = "text"      # text | json
    include_timings: bool = False    # wall-clock breaks byte-reproducibility, so opt-in

    def validate(self) -> None:
        if not self.features:
            raise ConfigError("missing required key: features")
        if not self.out_dir:
            raise ConfigError("missing required key: out_dir")
        if self.clusters < 2:
            raise ConfigError(f"clusters must be >= 2, got {self.clusters}")
        if self.variant not in ("baseline", "pi", "tep"):
            raise ConfigError(f"variant must be baseline|pi|tep, got {self.variant!r}")
        if self.report_format not in ("text", "json"):
            raise ConfigError(f"report_format must be text|json, got {self.report_format!r}")
        if self.variant == "pi" and not self.transform_features and self.jitter_sigma <= 0:
            raise ConfigError("pi variant needs transform_features or jitter_sigma > 0")
        for path_key in ("features", "labels", "transform_features"):
            value = getattr(self, path_key)
            if value and not Path(value).is_file():
                raise ConfigError(f"{path_key} file not found: {value}")

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            variant=Variant(self.variant),
            epochs=self.epochs,
            ramp_length=self.ramp_length,
            learning_rate=self.learning_rate,
            alpha=self.alpha,
            beta=self.beta,
            target_update_interval=self.target_update_interval,
            seed=self.seed,
            squared_consistency=self.squared_consistency,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected {kind}, got {raw!r}") from exc
    return raw


def parse_assignments(pairs) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"expected key=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = _coerce(key, raw.strip())
    return out


def load_config(path, overrides=()) -> ExperimentConfig:
    """Parse a key=value file, then apply CLI overrides (CLI wins)."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    lines = [
        ln for ln in p.read_text().splitlines() if ln.strip() and not ln.strip().startswith("#")
    ]
    values = parse_assignments(lines)
    values.update(parse_assignments(overrides))
    return ExperimentConfig(**values)
