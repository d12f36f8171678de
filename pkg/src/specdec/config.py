"""
Run Configuration - SpecDec Lab

Lookahead, sampling policy, generation limits and seeds for one generation run.
"""

import json
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Any, Optional

from src.errors import ConfigError

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64


class SamplingPolicy(Enum):
    GREEDY = "greedy"
    TEMPERATURE = "temperature"


@dataclass(frozen=True)
class SpecRunConfig:
    lookahead: int = 6
    policy: SamplingPolicy = SamplingPolicy.GREEDY
    temperature: float = 1.0
    max_new_tokens: int = 64
    eos_token: Optional[int] = None
    rng_seed: int = 0
    warmup_iterations: int = 3

    def __post_init__(self):
        if isinstance(self.policy, str):
            try:
                object.__setattr__(self, "policy", SamplingPolicy(self.policy))
            except ValueError:
                raise ConfigError(f"Unknown sampling policy {self.policy!r}")
        if not isinstance(self.lookahead, int) or self.lookahead < 1:
            raise ConfigError(f"lookahead must be an integer >= 1, got {self.lookahead!r}")
        if self.policy == SamplingPolicy.TEMPERATURE and not self.temperature > 0:
            raise ConfigError(f"temperature must be > 0, got {self.temperature}")
        if not isinstance(self.max_new_tokens, int) or self.max_new_tokens < 0:
            raise ConfigError(f"max_new_tokens must be a non-negative integer, got {self.max_new_tokens!r}")
        if self.eos_token is not None and self.eos_token < 0:
            raise ConfigError("eos_token must be a token id")
        if not 0 <= self.rng_seed < MAX_SEED:
            raise ConfigError(f"rng_seed must be an unsigned 64-bit integer, got {self.rng_seed}")
        if self.warmup_iterations < 0:
            raise ConfigError("warmup_iterations must be >= 0")

    @property
    def is_greedy(self) -> bool:
        return self.policy == SamplingPolicy.GREEDY

    @property
    def sampling_temperature(self) -> Optional[float]:
        """Temperature passed to the softmax; None for greedy runs."""
        return None if self.is_greedy else self.temperature

    def with_overrides(self, **changes: Any) -> "SpecRunConfig":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lookahead": self.lookahead,
            "policy": self.policy.value,
            "temperature": self.temperature,
            "max_new_tokens": self.max_new_tokens,
            "eos_token": self.eos_token,
            "rng_seed": self.rng_seed,
            "warmup_iterations": self.warmup_iterations
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SpecRunConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"Unknown SpecRunConfig fields: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SpecRunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"SpecRunConfig is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("SpecRunConfig JSON must be an object")
        return cls.from_dict(data)


def create_greedy_config(lookahead: int = 6, max_new_tokens: int = 64, **kwargs: Any) -> SpecRunConfig:
    return SpecRunConfig(lookahead=lookahead, max_new_tokens=max_new_tokens, **kwargs)


def create_sampling_config(temperature: float = 1.0, lookahead: int = 6, max_new_tokens: int = 64,
                           **kwargs: Any) -> SpecRunConfig:
    return SpecRunConfig(lookahead=lookahead, policy=SamplingPolicy.TEMPERATURE,
                         temperature=temperature, max_new_tokens=max_new_tokens, **kwargs)
