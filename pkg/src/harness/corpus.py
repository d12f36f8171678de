"""
Corpus Ingestion - SpecDec Lab

Text (one record per non-empty line) or JSONL ({"text": ...} per line) into
byte-level token sequences, plus a seeded synthetic Markov source for
desk-scale experiments.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from src.errors import CorpusFormatError, ValidationError, ConfigError
from src.language_models import ByteTokenizer

logger = logging.getLogger(__name__)

JSONL_SUFFIXES = {".jsonl", ".ndjson"}


def read_records(path: str) -> List[str]:
    source = Path(path)
    if not source.exists():
        raise ValidationError(f"Corpus file not found: {path}")
    try:
        text = source.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise CorpusFormatError(f"{path} is not UTF-8: {e}") from e

    records = []
    is_jsonl = source.suffix.lower() in JSONL_SUFFIXES
    # read_text already folds \r\n to \n; other separators stay inside a record
    for line_number, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        if not is_jsonl:
            records.append(line)
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusFormatError(f"invalid JSON ({e.msg})", line_number) from e
        if not isinstance(record, dict) or not isinstance(record.get("text"), str):
            raise CorpusFormatError('expected an object with a string "text" field', line_number)
        records.append(record["text"])
    return records


def ingest_corpus(path: str, eos: bool = True, tokenizer: Optional[ByteTokenizer] = None) -> List[List[int]]:
    tokenizer = tokenizer or ByteTokenizer()
    records = read_records(path)
    if not records:
        logger.warning(f"Corpus {path} is empty; returning no sequences")
        return []
    sequences = [tokenizer.encode(record, add_eos=eos) for record in records]
    logger.info(f"Ingested {len(sequences)} records / {sum(len(s) for s in sequences)} tokens from {path}")
    return sequences


def generate_markov_corpus(num_tokens: int = 60000, order: int = 3, alphabet: int = 16,
                           branching: int = 3, sequence_length: int = 500, seed: int = 0) -> List[List[int]]:
    """
    Sequences from a sparse random order-k Markov source over token ids
    [0, alphabet). Each history allows `branching` successors with Dirichlet
    weights, so higher-order n-grams genuinely predict better.
    """
    if order < 1 or alphabet < 2 or not 1 <= branching <= alphabet or sequence_length < order + 1:
        raise ConfigError("Invalid Markov corpus parameters")
    rng = np.random.default_rng(seed)
    transitions = {}

    def successors(history):
        entry = transitions.get(history)
        if entry is None:
            tokens = rng.choice(alphabet, size=branching, replace=False)
            weights = rng.dirichlet(np.full(branching, 0.5))
            entry = (tokens, np.cumsum(weights))
            transitions[history] = entry
        return entry

    sequences = []
    produced = 0
    while produced < num_tokens:
        length = min(sequence_length, num_tokens - produced)
        seq = [int(t) for t in rng.integers(0, alphabet, size=min(order, length))]
        while len(seq) < length:
            tokens, cdf = successors(tuple(seq[-order:]))
            index = min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), branching - 1)
            seq.append(int(tokens[index]))
        sequences.append(seq)
        produced += length
    return sequences


def split_prompts(sequences: Sequence[Sequence[int]], count: int, length: int) -> List[List[int]]:
    """First `length` tokens of the first `count` sequences long enough to hold them."""
    prompts = [list(seq[:length]) for seq in sequences if len(seq) >= length][:count]
    if not prompts:
        raise ValidationError(f"No sequence has at least {length} tokens")
    return prompts
