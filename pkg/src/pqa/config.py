"""Engine configuration: encoder, thresholds, training defaults, provider."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .ml_engine import TrainConfig

ENV_DATA_DIR = "PQA_DATA_DIR"
ENV_PORT = "PQA_PORT"
ENV_PROVIDER_TOKEN = "PQA_PROVIDER_TOKEN"


@dataclass
class EmbeddingConfig:
    dimension: int = 256
    seed: int = 1
    ngram_min: int = 3
    ngram_max: int = 5


@dataclass
class ProviderConfig:
    mode: str = "rule_based"  # "rule_based" | "remote"
    endpoint: str = ""
    token_env: str = ENV_PROVIDER_TOKEN
    timeout: float = 10.0


@dataclass
class EngineConfig:
    data_dir: Path = Path("pqa_data")
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    tau_model: float = 0.35
    tau_dataset: float = 0.20
    training: TrainConfig = field(default_factory=TrainConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)

    def validate(self) -> "EngineConfig":
        if self.embedding.dimension <= 0:
            raise ValueError("embedding dimension must be positive")
        for name, value in (("tau_model", self.tau_model), ("tau_dataset", self.tau_dataset)):
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be within [0, 1], got {value}")
        return self


def load_config(path: str | Path | None = None, data_dir: str | Path | None = None) -> EngineConfig:
    """Config from JSON file (if given/found), environment, and overrides."""
    cfg = EngineConfig()
    if path is None and data_dir is not None:
        candidate = Path(data_dir) / "config.json"
        if candidate.is_file():
            path = candidate
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if "data_dir" in raw:
            cfg.data_dir = Path(raw["data_dir"])
        for key, value in raw.get("embedding", {}).items():
            setattr(cfg.embedding, key, value)
        cfg.tau_model = raw.get("thresholds", {}).get("tau_model", cfg.tau_model)
        cfg.tau_dataset = raw.get("thresholds", {}).get("tau_dataset", cfg.tau_dataset)
        for key, value in raw.get("training", {}).items():
            setattr(cfg.training, key, value)
        for key, value in raw.get("provider", {}).items():
            setattr(cfg.provider, key, value)
    if os.environ.get(ENV_DATA_DIR):
        cfg.data_dir = Path(os.environ[ENV_DATA_DIR])
    if data_dir is not None:
        cfg.data_dir = Path(data_dir)
    return cfg.validate()
