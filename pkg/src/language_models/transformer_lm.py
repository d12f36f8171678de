"""Transformer Adapter - SpecDec Lab"""

import logging
from typing import List, Optional

import numpy as np

from src.model_core import ModelConfig, TinyTransformer, init_model
from .base import LanguageModel, DecodeState

logger = logging.getLogger(__name__)


class TransformerLM(LanguageModel):
    """Exposes a TinyTransformer through the LanguageModel interface; the state cache is a KVCache."""

    def __init__(self, model: TinyTransformer, name: Optional[str] = None):
        self.model = model
        cfg = model.config
        self.name = name or f"transformer-l{cfg.num_layers}-d{cfg.model_dim}"

    @property
    def config(self) -> ModelConfig:
        return self.model.config

    @property
    def vocab_size(self) -> int:
        return self.model.config.vocab_size

    @property
    def max_positions(self) -> Optional[int]:
        return self.model.config.max_positions

    def new_state(self) -> DecodeState:
        return DecodeState(tokens=[], cache=self.model.new_cache())

    def _extend_logits(self, state: DecodeState, ids: List[int]) -> np.ndarray:
        return self.model.extend(state.cache, ids)

    def _truncate_cache(self, state: DecodeState, length: int) -> None:
        state.cache.truncate(length)


def create_transformer_lm(config: ModelConfig, name: Optional[str] = None) -> TransformerLM:
    return TransformerLM(init_model(config), name=name)
