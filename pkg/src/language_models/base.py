"""
Language Model Interface - SpecDec Lab

Uniform prefill / decode / distribution API so the engine can pair any draft
with any target.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ContextOverflowError, VocabularyError, EmptyInputError, DistributionError

logger = logging.getLogger(__name__)

# Finite stand-in for log(0); exp() of it underflows to exactly 0.0.
LOG_ZERO = -1e30


@dataclass
class DecodeState:
    """Single-owner session state: the tokens seen so far plus any cache."""
    tokens: List[int] = field(default_factory=list)
    cache: Any = None

    @property
    def length(self) -> int:
        return len(self.tokens)


def distribution(logits: np.ndarray, temperature: Optional[float] = None) -> np.ndarray:
    """Softmax in float64. Works row-wise on [n, V] input."""
    scores = np.asarray(logits, dtype=np.float64)
    if temperature is not None:
        if temperature <= 0:
            raise DistributionError(f"temperature must be > 0, got {temperature}")
        scores = scores / temperature
    scores = scores - scores.max(axis=-1, keepdims=True)
    weights = np.exp(scores)
    return weights / weights.sum(axis=-1, keepdims=True)


def check_distribution(probs: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size < 2:
        raise DistributionError("A distribution must be a vector with at least two entries")
    if not np.all(np.isfinite(probs)) or np.any(probs < 0):
        raise DistributionError("Distribution entries must be finite and non-negative")
    if abs(probs.sum() - 1.0) > atol:
        raise DistributionError(f"Distribution sums to {probs.sum():.12f}, expected 1")
    return probs


class LanguageModel(ABC):
    """Base class for draft and target models."""

    name: str = "model"

    @property
    @abstractmethod
    def vocab_size(self) -> int:
        ...

    @property
    def max_positions(self) -> Optional[int]:
        """Context window; None means unbounded."""
        return None

    def new_state(self) -> DecodeState:
        return DecodeState()

    @abstractmethod
    def _extend_logits(self, state: DecodeState, ids: List[int]) -> np.ndarray:
        """Return [n, V] logits for the new positions; state.tokens is not yet updated."""

    def _truncate_cache(self, state: DecodeState, length: int) -> None:
        pass

    def extend(self, state: DecodeState, tokens: Sequence[int]) -> np.ndarray:
        """Prefill-style pass over new tokens; row i predicts the token after tokens[i]."""
        ids = [int(t) for t in tokens]
        if not ids:
            raise EmptyInputError("extend() needs at least one token")
        if min(ids) < 0 or max(ids) >= self.vocab_size:
            raise VocabularyError(f"{self.name}: token ids must lie in [0, {self.vocab_size})")
        if self.max_positions is not None and state.length + len(ids) > self.max_positions:
            raise ContextOverflowError(
                f"{self.name}: {state.length} + {len(ids)} positions exceeds context window {self.max_positions}"
            )
        logits = self._extend_logits(state, ids)
        state.tokens.extend(ids)
        return logits

    def truncate(self, state: DecodeState, length: int) -> None:
        if not 0 <= length <= state.length:
            raise ValueError(f"Cannot truncate state of length {state.length} to {length}")
        self._truncate_cache(state, length)
        del state.tokens[length:]

    def prefill(self, tokens: Sequence[int]) -> Tuple[np.ndarray, DecodeState]:
        state = self.new_state()
        logits = self.extend(state, tokens)
        return logits[-1], state

    def decode_step(self, state: DecodeState, token: int) -> np.ndarray:
        return self.extend(state, [token])[0]

    def next_distribution(self, context: Sequence[int]) -> np.ndarray:
        logits, _ = self.prefill(context)
        return distribution(logits)

    def fits(self, length: int) -> bool:
        return self.max_positions is None or length <= self.max_positions


def perplexity(model: LanguageModel, sequences: Sequence[Sequence[int]]) -> float:
    """exp of the mean negative log-likelihood over every predicted position."""
    total_nll = 0.0
    count = 0
    for seq in sequences:
        if len(seq) < 2:
            continue
        state = model.new_state()
        probs = distribution(model.extend(state, seq[:-1]))
        picked = probs[np.arange(len(seq) - 1), np.asarray(seq[1:], dtype=np.int64)]
        total_nll -= float(np.log(np.maximum(picked, np.finfo(np.float64).tiny)).sum())
        count += len(seq) - 1
    if count == 0:
        raise EmptyInputError("perplexity needs at least one sequence of length >= 2")
    return float(np.exp(total_nll / count))
