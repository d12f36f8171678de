"""
Replay Model - SpecDec Lab

Scripted test double: the distribution after a context of length n is
script[n - prompt_length], whatever the tokens are.
"""

import logging
from typing import List, Sequence

import numpy as np

from src.errors import ScriptExhaustedError, DistributionError
from .base import LanguageModel, DecodeState, LOG_ZERO, check_distribution

logger = logging.getLogger(__name__)


class ReplayModel(LanguageModel):

    def __init__(self, script: Sequence[Sequence[float]], prompt_length: int = 1, name: str = "replay"):
        if not script:
            raise DistributionError("A replay script needs at least one distribution")
        if prompt_length < 1:
            raise DistributionError("prompt_length must be at least 1")
        vectors = []
        for index, vector in enumerate(script):
            try:
                vectors.append(check_distribution(vector))
            except DistributionError as e:
                raise DistributionError(f"script[{index}]: {e}") from e
        if len({v.size for v in vectors}) != 1:
            raise DistributionError("All script vectors must have the same length")
        self.script = np.stack(vectors)
        self.script.setflags(write=False)
        self.prompt_length = prompt_length
        self.name = name
        with np.errstate(divide="ignore"):
            logits = np.log(self.script)
        self._logits = np.where(self.script > 0, logits, LOG_ZERO)

    @property
    def vocab_size(self) -> int:
        return int(self.script.shape[1])

    def _position(self, context_length: int) -> int:
        position = context_length - self.prompt_length
        if position >= len(self.script):
            raise ScriptExhaustedError(
                f"{self.name}: query at script position {position} but the script has {len(self.script)} entries"
            )
        return position

    def _extend_logits(self, state: DecodeState, ids: List[int]) -> np.ndarray:
        rows = np.zeros((len(ids), self.vocab_size), dtype=np.float64)
        for i in range(len(ids)):
            position = self._position(state.length + i + 1)
            # Positions inside the prompt are never read by the engine.
            if position >= 0:
                rows[i] = self._logits[position]
        return rows

    def next_distribution(self, context: Sequence[int]) -> np.ndarray:
        position = self._position(len(context))
        if position < 0:
            raise ScriptExhaustedError(f"{self.name}: context shorter than the prompt length {self.prompt_length}")
        return self.script[position]


def replay_model(script: Sequence[Sequence[float]], prompt_length: int = 1, name: str = "replay") -> ReplayModel:
    return ReplayModel(script, prompt_length=prompt_length, name=name)


def one_hot_script(tokens: Sequence[int], vocab_size: int) -> List[List[float]]:
    """Script whose argmax at each position is the given token."""
    script = []
    for token in tokens:
        row = [0.0] * vocab_size
        row[token] = 1.0
        script.append(row)
    return script
