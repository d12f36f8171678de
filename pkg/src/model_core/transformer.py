"""
Tiny Transformer - SpecDec Lab

Decoder-only transformer in numpy (float32, CPU, batch size 1) with a
preallocated KV cache. Layout follows OPT-125M: learned absolute positions,
pre-LayerNorm blocks, ReLU FFN, biases everywhere, final LayerNorm and an LM
head tied to the token embedding.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import ContextOverflowError, VocabularyError, EmptyInputError, ConfigError
from .config import ModelConfig

logger = logging.getLogger(__name__)

DTYPE = np.float32
LAYER_NORM_EPS = 1e-5


@dataclass
class LayerWeights:
    ln1_gain: np.ndarray
    ln1_bias: np.ndarray
    w_q: np.ndarray
    b_q: np.ndarray
    w_k: np.ndarray
    b_k: np.ndarray
    w_v: np.ndarray
    b_v: np.ndarray
    w_o: np.ndarray
    b_o: np.ndarray
    ln2_gain: np.ndarray
    ln2_bias: np.ndarray
    w_up: np.ndarray
    b_up: np.ndarray
    w_down: np.ndarray
    b_down: np.ndarray

    def arrays(self) -> List[np.ndarray]:
        return list(self.__dict__.values())


class KVCache:
    """Per-layer keys/values, shape [layers, heads, max_positions, head_dim]."""

    def __init__(self, config: ModelConfig):
        shape = (config.num_layers, config.num_heads, config.max_positions, config.head_dim)
        self.keys = np.zeros(shape, dtype=DTYPE)
        self.values = np.zeros(shape, dtype=DTYPE)
        self.length = 0
        self.max_positions = config.max_positions

    @property
    def is_full(self) -> bool:
        return self.length >= self.max_positions

    @property
    def nbytes_used(self) -> int:
        per_position = self.keys[:, :, 0, :].nbytes + self.values[:, :, 0, :].nbytes
        return per_position * self.length

    def truncate(self, length: int) -> None:
        if not 0 <= length <= self.length:
            raise ValueError(f"Cannot truncate cache of length {self.length} to {length}")
        self.length = length

    def copy(self) -> "KVCache":
        clone = KVCache.__new__(KVCache)
        clone.keys = self.keys.copy()
        clone.values = self.values.copy()
        clone.length = self.length
        clone.max_positions = self.max_positions
        return clone


def _layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = ((x - mean) ** 2).mean(axis=-1, keepdims=True)
    return ((x - mean) / np.sqrt(var + DTYPE(LAYER_NORM_EPS))) * gain + bias


class TinyTransformer:
    """Immutable after construction; caches are owned by callers."""

    def __init__(self, config: ModelConfig):
        self.config = config
        rng = np.random.Generator(np.random.PCG64(config.weight_seed))
        d, f = config.model_dim, config.ffn_dim
        scale = 1.0 / np.sqrt(d)

        def draw(*shape: int) -> np.ndarray:
            return rng.normal(0.0, scale, size=shape).astype(DTYPE)

        # Draw order is part of the determinism contract: embeddings, positions,
        # then each layer q, k, v, o, up, down.
        self.token_embedding = draw(config.vocab_size, d)
        self.position_embedding = draw(config.max_positions, d)
        self.layers: List[LayerWeights] = []
        for _ in range(config.num_layers):
            w_q, w_k, w_v, w_o = draw(d, d), draw(d, d), draw(d, d), draw(d, d)
            w_up, w_down = draw(d, f), draw(f, d)
            self.layers.append(LayerWeights(
                ln1_gain=np.ones(d, DTYPE), ln1_bias=np.zeros(d, DTYPE),
                w_q=w_q, b_q=np.zeros(d, DTYPE),
                w_k=w_k, b_k=np.zeros(d, DTYPE),
                w_v=w_v, b_v=np.zeros(d, DTYPE),
                w_o=w_o, b_o=np.zeros(d, DTYPE),
                ln2_gain=np.ones(d, DTYPE), ln2_bias=np.zeros(d, DTYPE),
                w_up=w_up, b_up=np.zeros(f, DTYPE),
                w_down=w_down, b_down=np.zeros(d, DTYPE)
            ))
        self.final_gain = np.ones(d, DTYPE)
        self.final_bias = np.zeros(d, DTYPE)
        self._attn_scale = DTYPE(1.0 / np.sqrt(config.head_dim))
        for array in self._all_arrays():
            array.setflags(write=False)
        logger.debug(f"Initialized transformer {config.to_dict()} with {self.num_parameters()} parameters")

    def _all_arrays(self) -> List[np.ndarray]:
        arrays = [self.token_embedding, self.position_embedding]
        for layer in self.layers:
            arrays.extend(layer.arrays())
        arrays.extend([self.final_gain, self.final_bias])
        return arrays

    def num_parameters(self) -> int:
        return int(sum(a.size for a in self._all_arrays()))

    @property
    def vocab_size(self) -> int:
        return self.config.vocab_size

    def new_cache(self) -> KVCache:
        return KVCache(self.config)

    def _check_tokens(self, cache: KVCache, tokens: Sequence[int]) -> np.ndarray:
        ids = np.asarray(tokens, dtype=np.int64).reshape(-1)
        if ids.size == 0:
            raise EmptyInputError("At least one token is required")
        if ids.min() < 0 or ids.max() >= self.config.vocab_size:
            raise VocabularyError(f"Token ids must lie in [0, {self.config.vocab_size})")
        if cache.length + ids.size > self.config.max_positions:
            raise ContextOverflowError(
                f"{cache.length} cached + {ids.size} new positions exceeds max_positions={self.config.max_positions}"
            )
        return ids

    def _attention(self, x: np.ndarray, layer_index: int, layer: LayerWeights,
                   cache: KVCache, start: int) -> np.ndarray:
        n = x.shape[0]
        h, hd = self.config.num_heads, self.config.head_dim
        q = (x @ layer.w_q + layer.b_q).reshape(n, h, hd).transpose(1, 0, 2)
        k = (x @ layer.w_k + layer.b_k).reshape(n, h, hd).transpose(1, 0, 2)
        v = (x @ layer.w_v + layer.b_v).reshape(n, h, hd).transpose(1, 0, 2)
        end = start + n
        cache.keys[layer_index, :, start:end] = k
        cache.values[layer_index, :, start:end] = v
        keys = cache.keys[layer_index, :, :end]
        values = cache.values[layer_index, :, :end]

        scores = (q @ keys.transpose(0, 2, 1)) * self._attn_scale
        if n > 1:
            query_pos = np.arange(start, end)[:, None]
            key_pos = np.arange(end)[None, :]
            scores = np.where(key_pos > query_pos, DTYPE(-np.inf), scores)
        scores = scores - scores.max(axis=-1, keepdims=True)
        weights = np.exp(scores)
        weights = weights / weights.sum(axis=-1, keepdims=True)
        out = (weights @ values).transpose(1, 0, 2).reshape(n, h * hd)
        return out @ layer.w_o + layer.b_o

    def extend(self, cache: KVCache, tokens: Sequence[int]) -> np.ndarray:
        """Run new tokens through the model in one pass; returns [n, V] logits."""
        ids = self._check_tokens(cache, tokens)
        start = cache.length
        x = self.token_embedding[ids] + self.position_embedding[start:start + ids.size]
        for index, layer in enumerate(self.layers):
            x = x + self._attention(_layer_norm(x, layer.ln1_gain, layer.ln1_bias), index, layer, cache, start)
            hidden = _layer_norm(x, layer.ln2_gain, layer.ln2_bias) @ layer.w_up + layer.b_up
            x = x + np.maximum(hidden, DTYPE(0)) @ layer.w_down + layer.b_down
        cache.length = start + ids.size
        x = _layer_norm(x, self.final_gain, self.final_bias)
        return x @ self.token_embedding.T

    def prefill(self, tokens: Sequence[int]) -> Tuple[np.ndarray, KVCache]:
        cache = self.new_cache()
        logits = self.extend(cache, tokens)
        return logits[-1], cache

    def decode_step(self, cache: KVCache, token: int) -> np.ndarray:
        if cache.is_full:
            raise ContextOverflowError(f"KV cache is full ({cache.length} positions)")
        return self.extend(cache, [token])[0]


def init_model(config: ModelConfig) -> TinyTransformer:
    if config.model_dim % config.num_heads != 0:
        raise ConfigError("model_dim must be divisible by num_heads")
    return TinyTransformer(config)


def prefill(model: TinyTransformer, tokens: Sequence[int]) -> Tuple[np.ndarray, KVCache]:
    return model.prefill(tokens)


def decode_step(model: TinyTransformer, cache: KVCache, token: int) -> np.ndarray:
    return model.decode_step(cache, token)
