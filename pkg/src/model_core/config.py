"""
Model Configuration - SpecDec Lab

Architecture hyperparameters for the tiny transformer and for design-space
entries, plus presets for the published shapes the lab reasons about.
"""

import json
import logging
from dataclasses import dataclass, asdict, replace
from typing import Dict, List, Any

from src.errors import ConfigError

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class ModelConfig:
    """Decoder-only transformer shape. Field names double as the JSON keys."""
    num_layers: int
    num_heads: int
    model_dim: int
    ffn_dim: int
    vocab_size: int
    max_positions: int
    weight_seed: int = 0

    def __post_init__(self):
        for name in ("num_layers", "num_heads", "model_dim", "ffn_dim", "vocab_size", "max_positions"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.model_dim % self.num_heads != 0:
            raise ConfigError(
                f"model_dim ({self.model_dim}) must be divisible by num_heads ({self.num_heads})"
            )
        if self.vocab_size < 2:
            raise ConfigError("vocab_size must be at least 2")
        if self.max_positions < 2:
            raise ConfigError("max_positions must be at least 2")
        if not isinstance(self.weight_seed, int) or not 0 <= self.weight_seed < MAX_SEED:
            raise ConfigError(f"weight_seed must be an unsigned 64-bit integer, got {self.weight_seed!r}")

    @property
    def head_dim(self) -> int:
        return self.model_dim // self.num_heads

    def with_overrides(self, **changes: Any) -> "ModelConfig":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        expected = set(cls.__dataclass_fields__)
        unknown = set(data) - expected
        if unknown:
            raise ConfigError(f"Unknown ModelConfig fields: {sorted(unknown)}")
        missing = expected - set(data) - {"weight_seed"}
        if missing:
            raise ConfigError(f"Missing ModelConfig fields: {sorted(missing)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"ModelConfig is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("ModelConfig JSON must be an object")
        return cls.from_dict(data)


# Factory Functions

def create_tiny_config(num_layers: int = 2, model_dim: int = 32, num_heads: int = 2,
                       vocab_size: int = 257, max_positions: int = 128,
                       weight_seed: int = 0) -> ModelConfig:
    """Desk-scale config used by tests and the default CLI runs."""
    return ModelConfig(
        num_layers=num_layers,
        num_heads=num_heads,
        model_dim=model_dim,
        ffn_dim=2 * model_dim,
        vocab_size=vocab_size,
        max_positions=max_positions,
        weight_seed=weight_seed
    )


def create_opt_125m_config() -> ModelConfig:
    return ModelConfig(12, 12, 768, 3072, 50272, 2050)


def create_opt_350m_config() -> ModelConfig:
    # Counted with ParamConvention(embed_proj_dim=512, final_norm=False).
    return ModelConfig(24, 16, 1024, 4096, 50272, 2050)


def create_budget_variant_configs() -> List[ModelConfig]:
    """OPT-350M-budget variants trading depth for width (head_dim 64)."""
    rows = [
        (24, 16, 1024, 4096),
        (20, 20, 1280, 3448),
        (16, 22, 1408, 4096),
        (12, 28, 1792, 3448),
        (8, 36, 2304, 3448),
        (4, 56, 3584, 3448),
    ]
    return [ModelConfig(l, h, d, f, 50272, 2050) for l, h, d, f in rows]


def create_pruned_configs() -> Dict[str, ModelConfig]:
    """Pruned LLaMA-derived draft shapes (head_dim 128)."""
    rows = {
        "pruned-1.3b": (24, 16, 5504, 2048),
        "pruned-wide-1.3b": (12, 20, 9280, 2560),
        "pruned-wide-796m": (5, 32, 11008, 4096),
        "pruned-wide-543m": (3, 32, 11008, 4096),
        "pruned-wide-290m": (1, 32, 11008, 4096),
    }
    return {
        name: ModelConfig(num_layers=l, num_heads=h, model_dim=d, ffn_dim=f,
                          vocab_size=32000, max_positions=2048)
        for name, (l, h, f, d) in rows.items()
    }
