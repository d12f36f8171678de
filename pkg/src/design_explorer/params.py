"""
Parameter and KV-Cache Accounting - SpecDec Lab

Exact parameter counts for decoder-only configs under an explicit convention,
and per-token KV-cache memory.
"""

import logging
from dataclasses import dataclass, asdict
from typing import Dict, Any, Optional

from src.errors import ConfigError
from src.model_core import ModelConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamConvention:
    """
    How to count. Defaults match the OPT-125M layout the tiny transformer
    implements: tied LM head, learned positions, biases and LayerNorms with
    bias, ReLU FFN, final norm.

    embed_proj_dim: OPT-350M style factorized embedding (token embeddings of
        this size plus bias-free in/out projections to model_dim).
    gated_ffn: LLaMA-style three-matrix FFN.
    biases: linear-layer biases; also selects LayerNorm (gain + bias) over
        RMSNorm (gain only).
    """
    tied_embeddings: bool = True
    embed_proj_dim: Optional[int] = None
    final_norm: bool = True
    gated_ffn: bool = False
    biases: bool = True
    learned_positions: bool = True

    def __post_init__(self):
        if self.embed_proj_dim is not None and self.embed_proj_dim < 1:
            raise ConfigError("embed_proj_dim must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ParamConvention":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"Unknown ParamConvention fields: {sorted(unknown)}")
        return cls(**data)


def create_opt350m_convention() -> ParamConvention:
    return ParamConvention(embed_proj_dim=512, final_norm=False)


def create_llama_convention() -> ParamConvention:
    return ParamConvention(tied_embeddings=False, gated_ffn=True, biases=False, learned_positions=False)


def count_params(config: ModelConfig, convention: ParamConvention = ParamConvention()) -> int:
    V, P = config.vocab_size, config.max_positions
    d, f, l = config.model_dim, config.ffn_dim, config.num_layers
    e = convention.embed_proj_dim or d
    norm = 2 * d if convention.biases else d

    total = V * e
    if not convention.tied_embeddings:
        total += V * e
    if convention.learned_positions:
        total += P * d
    if convention.embed_proj_dim is not None:
        total += 2 * e * d

    attention = 4 * d * d + (4 * d if convention.biases else 0)
    if convention.gated_ffn:
        ffn = 3 * d * f + (2 * f + d if convention.biases else 0)
    else:
        ffn = 2 * d * f + (f + d if convention.biases else 0)
    total += l * (attention + ffn + 2 * norm)

    if convention.final_norm:
        total += norm
    return total


def param_formula(convention: ParamConvention = ParamConvention()) -> str:
    """Human-readable form of count_params under a convention."""
    e = "e" if convention.embed_proj_dim is not None else "d"
    norm = "2d" if convention.biases else "d"
    terms = [f"V*{e}" if convention.tied_embeddings else f"2*V*{e}"]
    if convention.learned_positions:
        terms.append("P*d")
    if convention.embed_proj_dim is not None:
        terms.append(f"2*e*d (e={convention.embed_proj_dim})")
    attention = "4d^2 + 4d" if convention.biases else "4d^2"
    if convention.gated_ffn:
        ffn = "3*d*f + 2f + d" if convention.biases else "3*d*f"
    else:
        ffn = "2*d*f + f + d" if convention.biases else "2*d*f"
    terms.append(f"l*[{attention} + {ffn} + 2*{norm}]")
    if convention.final_norm:
        terms.append(norm)
    return " + ".join(terms)


def kv_bytes(num_layers: int, model_dim: int, bytes_per_element: int = 2) -> int:
    """Keys and values for every layer: 2 * l * d * bytes."""
    if num_layers < 0 or model_dim < 0 or bytes_per_element < 1:
        raise ConfigError("kv_bytes needs non-negative sizes and a positive element size")
    return 2 * num_layers * model_dim * bytes_per_element


def kv_bytes_per_token(config: ModelConfig, bytes_per_element: int = 2) -> int:
    return kv_bytes(config.num_layers, config.model_dim, bytes_per_element)


def kv_saving(config: ModelConfig, reference: ModelConfig) -> float:
    """Fraction of per-token KV memory config saves relative to reference."""
    return 1.0 - kv_bytes_per_token(config) / kv_bytes_per_token(reference)
