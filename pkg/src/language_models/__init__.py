"""
SpecDec Lab - Language Models

Uniform LM interface with transformer, n-gram and replay implementations.
"""

from .base import LanguageModel, DecodeState, distribution, check_distribution, perplexity, LOG_ZERO
from .ngram import NGramModel, fit_ngram, save_ngram, load_ngram
from .replay import ReplayModel, replay_model, one_hot_script
from .transformer_lm import TransformerLM, create_transformer_lm
from .tokenizer import ByteTokenizer, EOS_TOKEN, BYTE_VOCAB_SIZE

__all__ = [
    'LanguageModel',
    'DecodeState',
    'distribution',
    'check_distribution',
    'perplexity',
    'LOG_ZERO',
    'NGramModel',
    'fit_ngram',
    'save_ngram',
    'load_ngram',
    'ReplayModel',
    'replay_model',
    'one_hot_script',
    'TransformerLM',
    'create_transformer_lm',
    'ByteTokenizer',
    'EOS_TOKEN',
    'BYTE_VOCAB_SIZE'
]
