"""Tests for the LM interface: n-gram, replay and transformer adapters."""

import json

import numpy as np
import pytest

from src.errors import (
    ConfigError, DistributionError, EmptyInputError, ScriptExhaustedError, SchemaMismatchError,
    VocabularyError, ContextOverflowError
)
from src.model_core import create_tiny_config
from src.language_models import (
    NGramModel, fit_ngram, save_ngram, load_ngram, perplexity, distribution,
    replay_model, one_hot_script, create_transformer_lm, ByteTokenizer, EOS_TOKEN
)


def _assert_distribution(probs):
    assert abs(probs.sum() - 1.0) <= 1e-9
    assert np.all(probs >= 0)


class TestNGram:

    def test_degenerate_unigram(self):
        model = fit_ngram([[5] * 100], order=1, discount=0.5)
        probs = model.next_distribution([5])
        assert int(np.argmax(probs)) == 5
        expected = (100 - 0.5) / 100 + 0.5 / 100 / model.vocab_size
        assert probs[5] == pytest.approx(expected, abs=1e-12)
        _assert_distribution(probs)

    def test_fit_is_deterministic(self, markov_corpus):
        a = fit_ngram(markov_corpus[:20], order=3)
        b = fit_ngram(markov_corpus[:20], order=3)
        assert a.counts() == b.counts()

    def test_higher_order_lowers_perplexity(self, markov_corpus, ngram_models):
        held_in = markov_corpus[:10]
        assert perplexity(ngram_models[4], held_in) <= perplexity(ngram_models[1], held_in)

    def test_normalized_for_seen_and_unseen_contexts(self, ngram_models):
        model = ngram_models[3]
        for context in ([], [1], [1, 2], [250, 251], [3, 4, 5, 6]):
            _assert_distribution(model.next_distribution(context))

    def test_full_support(self, ngram_models):
        assert np.all(ngram_models[4].next_distribution([1, 2, 3]) > 0)

    def test_distribution_matches_extend_logits(self, ngram_models):
        model = ngram_models[4]
        context = [3, 1, 4, 1, 5]
        logits, _ = model.prefill(context)
        assert np.allclose(distribution(logits), model.next_distribution(context), atol=1e-9, rtol=0)

    def test_empty_corpus(self):
        with pytest.raises(EmptyInputError):
            fit_ngram([], order=2)
        with pytest.raises(EmptyInputError):
            fit_ngram([[]], order=2)

    @pytest.mark.parametrize("order", [0, 9])
    def test_order_range(self, order):
        with pytest.raises(ConfigError):
            fit_ngram([[1, 2, 3]], order=order)

    def test_discount_range(self):
        with pytest.raises(ConfigError):
            fit_ngram([[1, 2, 3]], order=2, discount=1.0)

    def test_memo_is_bounded(self, markov_corpus):
        model = NGramModel(3, 0.5, 257, fit_ngram(markov_corpus[:5], order=3).counts(), memo_size=16)
        first = model.next_distribution([1, 2])
        for a in range(20):
            for b in range(20):
                model.next_distribution([a, b])
        assert model.cached_histories == 16
        assert np.array_equal(model.next_distribution([1, 2]), first)

    def test_memo_size_must_be_positive(self):
        with pytest.raises(ConfigError):
            NGramModel(2, 0.5, 8, {(): {1: 1}}, memo_size=0)

    def test_out_of_vocab_corpus(self):
        with pytest.raises(VocabularyError):
            fit_ngram([[1, 300]], order=2)

    def test_save_and_load(self, tmp_path, markov_corpus):
        model = fit_ngram(markov_corpus[:5], order=3, discount=0.4)
        path = save_ngram(model, str(tmp_path / "models" / "tri.json"))
        loaded = load_ngram(str(path))
        assert loaded.counts() == model.counts()
        assert loaded.discount == 0.4
        assert np.array_equal(loaded.next_distribution([1, 2]), model.next_distribution([1, 2]))

    def test_load_rejects_unknown_version(self, tmp_path):
        data = fit_ngram([[1, 2, 3]], order=2).to_dict()
        data["format_version"] = 99
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(SchemaMismatchError):
            load_ngram(str(path))


class TestReplay:

    def test_greedy_emits_script_argmaxes(self):
        model = replay_model([[1, 0], [0, 1]])
        logits, state = model.prefill([0])
        assert int(np.argmax(logits)) == 0
        assert int(np.argmax(model.decode_step(state, 0))) == 1

    def test_rejects_unnormalized(self):
        with pytest.raises(DistributionError):
            replay_model([[0.5, 0.6]])

    def test_rejects_ragged_script(self):
        with pytest.raises(DistributionError):
            replay_model([[1, 0], [0, 0, 1]])

    def test_query_past_script(self):
        model = replay_model(one_hot_script([0, 1, 2], 3))
        for length in (1, 2, 3):
            model.next_distribution([0] * length)
        with pytest.raises(ScriptExhaustedError):
            model.next_distribution([0] * 4)

    def test_position_ignores_context(self):
        model = replay_model([[0.25, 0.75], [1.0, 0.0]], prompt_length=2)
        assert np.array_equal(model.next_distribution([0, 0]), model.next_distribution([1, 1]))
        assert model.next_distribution([1, 0, 1])[0] == 1.0


class TestTransformerLM:

    def test_distribution_is_softmax_of_logits(self):
        lm = create_transformer_lm(create_tiny_config())
        logits, _ = lm.prefill([1, 2, 3])
        probs = lm.next_distribution([1, 2, 3])
        _assert_distribution(probs)
        assert np.allclose(probs, distribution(logits), atol=1e-9, rtol=0)

    def test_truncate_rewinds_cache(self):
        lm = create_transformer_lm(create_tiny_config())
        state = lm.new_state()
        lm.extend(state, [1, 2, 3, 4])
        lm.truncate(state, 2)
        assert state.length == 2
        assert state.cache.length == 2

    def test_context_window(self):
        lm = create_transformer_lm(create_tiny_config(max_positions=4))
        assert lm.fits(4) and not lm.fits(5)
        with pytest.raises(ContextOverflowError):
            lm.prefill([1] * 5)


class TestByteTokenizer:

    def test_encode(self):
        assert ByteTokenizer().encode("ab") == [97, 98, EOS_TOKEN]

    def test_decode_stops_at_eos(self):
        assert ByteTokenizer().decode([104, 105, EOS_TOKEN, 106]) == "hi"
