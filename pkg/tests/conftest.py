"""Shared fixtures for the SpecDec Lab test suite."""

import pytest

from src.model_core import create_tiny_config
from src.language_models import fit_ngram
from src.harness import generate_markov_corpus


@pytest.fixture(scope="session")
def markov_corpus():
    """Held-in synthetic corpus, 60k tokens from an order-3 source."""
    return generate_markov_corpus(num_tokens=60000, seed=7)


@pytest.fixture(scope="session")
def ngram_models(markov_corpus):
    return {order: fit_ngram(markov_corpus, order) for order in (1, 2, 3, 4)}


@pytest.fixture(scope="session")
def prompts(markov_corpus):
    return [seq[:8] for seq in markov_corpus[:20]]


@pytest.fixture
def tiny_config():
    return create_tiny_config()


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "results"


class FakeClock:
    """Deterministic clock: every reading advances by a fixed step."""

    def __init__(self, step: float = 1.0):
        self.now = 0.0
        self.step = step

    def __call__(self) -> float:
        self.now += self.step
        return self.now


@pytest.fixture
def fake_clock():
    return FakeClock()
