"""
N-gram Model - SpecDec Lab

Interpolated absolute-discounting n-gram model. Probabilities are exact, which
makes it the reference pair for distribution and TAR tests.
"""

import json
import logging
from collections import Counter, OrderedDict, defaultdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Any

import numpy as np

from src.errors import ConfigError, EmptyInputError, VocabularyError, SchemaMismatchError
from .base import LanguageModel, DecodeState

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAX_ORDER = 8
MEMO_SIZE = 65536

Context = Tuple[int, ...]


class NGramModel(LanguageModel):
    """
    P(w | h) = max(c(h, w) - D, 0) / c(h) + D * N1+(h) / c(h) * P(w | h')

    h' drops the oldest token of h; the recursion bottoms out at the uniform
    distribution over the vocabulary. Contexts never seen in training back off
    to their longest seen suffix.
    """

    def __init__(self, order: int, discount: float, vocab_size: int,
                 counts: Dict[Context, Dict[int, int]], memo_size: int = MEMO_SIZE):
        if not 1 <= order <= MAX_ORDER:
            raise ConfigError(f"order must be in [1, {MAX_ORDER}], got {order}")
        if not 0.0 < discount < 1.0:
            raise ConfigError(f"discount must be in (0, 1), got {discount}")
        if vocab_size < 2:
            raise ConfigError("vocab_size must be at least 2")
        if memo_size < 1:
            raise ConfigError("memo_size must be at least 1")
        self.order = order
        self.discount = float(discount)
        self._vocab_size = vocab_size
        self.name = f"{order}-gram"
        # context -> (token ids, counts, total), token ids ascending
        self._tables: Dict[Context, Tuple[np.ndarray, np.ndarray, float]] = {}
        for context in sorted(counts, key=lambda c: (len(c), c)):
            table = counts[context]
            tokens = np.array(sorted(table), dtype=np.int64)
            values = np.array([table[t] for t in sorted(table)], dtype=np.float64)
            self._tables[context] = (tokens, values, float(values.sum()))
        # least recently used history first
        self._memo: "OrderedDict[Context, np.ndarray]" = OrderedDict()
        self._memo_size = memo_size

    @property
    def vocab_size(self) -> int:
        return self._vocab_size

    @property
    def num_contexts(self) -> int:
        return len(self._tables)

    @property
    def cached_histories(self) -> int:
        return len(self._memo)

    def history(self, context: Sequence[int]) -> Context:
        if self.order == 1:
            return ()
        return tuple(int(t) for t in context[-(self.order - 1):])

    def conditional(self, context: Sequence[int]) -> np.ndarray:
        """Next-token distribution given the full context (only the history is used)."""
        history = self.history(context)
        cached = self._memo.get(history)
        if cached is not None:
            self._memo.move_to_end(history)
            return cached
        probs = np.full(self._vocab_size, 1.0 / self._vocab_size)
        for k in range(len(history) + 1):
            suffix = history[len(history) - k:]
            entry = self._tables.get(suffix)
            if entry is None:
                break
            tokens, values, total = entry
            mixed = probs * (self.discount * tokens.size / total)
            mixed[tokens] += (values - self.discount) / total
            probs = mixed
        probs.setflags(write=False)
        self._memo[history] = probs
        if len(self._memo) > self._memo_size:
            self._memo.popitem(last=False)
        return probs

    def next_distribution(self, context: Sequence[int]) -> np.ndarray:
        ids = list(context)
        if ids and (min(ids) < 0 or max(ids) >= self._vocab_size):
            raise VocabularyError(f"{self.name}: token ids must lie in [0, {self._vocab_size})")
        return self.conditional(ids)

    def _extend_logits(self, state: DecodeState, ids: List[int]) -> np.ndarray:
        context = list(state.tokens)
        rows = np.empty((len(ids), self._vocab_size), dtype=np.float64)
        for i, token in enumerate(ids):
            context.append(token)
            rows[i] = np.log(self.conditional(context))
        return rows

    def counts(self) -> Dict[Context, Dict[int, int]]:
        return {
            context: {int(t): int(c) for t, c in zip(tokens, values)}
            for context, (tokens, values, _) in self._tables.items()
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "order": self.order,
            "discount": self.discount,
            "vocab_size": self._vocab_size,
            "contexts": [
                {"context": list(context), "tokens": tokens.tolist(), "counts": values.astype(int).tolist()}
                for context, (tokens, values, _) in self._tables.items()
            ]
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NGramModel":
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise SchemaMismatchError(f"Unsupported n-gram format_version {version!r}, expected {FORMAT_VERSION}")
        counts = {
            tuple(entry["context"]): dict(zip(entry["tokens"], entry["counts"]))
            for entry in data["contexts"]
        }
        return cls(data["order"], data["discount"], data["vocab_size"], counts)


def fit_ngram(corpus: Sequence[Sequence[int]], order: int, discount: float = 0.5,
              vocab_size: int = 257) -> NGramModel:
    """Count every history length from 0 to order-1 at every position; no padding."""
    if not corpus or all(len(seq) == 0 for seq in corpus):
        raise EmptyInputError("Cannot fit an n-gram model on an empty corpus")
    if not 1 <= order <= MAX_ORDER:
        raise ConfigError(f"order must be in [1, {MAX_ORDER}], got {order}")

    counts: Dict[Context, Counter] = defaultdict(Counter)
    num_tokens = 0
    for seq in corpus:
        ids = [int(t) for t in seq]
        if ids and (min(ids) < 0 or max(ids) >= vocab_size):
            raise VocabularyError(f"Corpus token ids must lie in [0, {vocab_size})")
        for i, token in enumerate(ids):
            for k in range(min(order - 1, i) + 1):
                counts[tuple(ids[i - k:i])][token] += 1
        num_tokens += len(ids)

    model = NGramModel(order, discount, vocab_size, counts)
    logger.info(f"Fitted {model.name} on {len(corpus)} sequences / {num_tokens} tokens "
                f"({model.num_contexts} contexts)")
    return model


def save_ngram(model: NGramModel, path: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_suffix(target.suffix + ".tmp")
    tmp.write_text(json.dumps(model.to_dict()), encoding="utf-8")
    tmp.replace(target)
    logger.info(f"Saved {model.name} to {target}")
    return target


def load_ngram(path: str) -> NGramModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaMismatchError(f"{path} is not a valid n-gram file: {e}") from e
    if not isinstance(data, dict):
        raise SchemaMismatchError(f"{path} is not a valid n-gram file")
    return NGramModel.from_dict(data)
