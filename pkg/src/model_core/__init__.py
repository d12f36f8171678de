"""
SpecDec Lab - Model Core

Minimal decoder-only transformer used as a latency and correctness substrate.
"""

from .config import (
    ModelConfig,
    create_tiny_config,
    create_opt_125m_config,
    create_opt_350m_config,
    create_budget_variant_configs,
    create_pruned_configs
)
from .transformer import TinyTransformer, KVCache, init_model, prefill, decode_step

__all__ = [
    'ModelConfig',
    'create_tiny_config',
    'create_opt_125m_config',
    'create_opt_350m_config',
    'create_budget_variant_configs',
    'create_pruned_configs',
    'TinyTransformer',
    'KVCache',
    'init_model',
    'prefill',
    'decode_step'
]
