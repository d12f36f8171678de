"""Tests for the tiny transformer and its KV cache."""

import numpy as np
import pytest

from src.errors import ConfigError, ContextOverflowError, VocabularyError, EmptyInputError
from src.model_core import (
    ModelConfig, create_tiny_config, create_pruned_configs, create_budget_variant_configs,
    init_model, prefill, decode_step
)
from src.design_explorer import count_params


def _rel_close(a, b, tol=1e-6):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.linalg.norm(a - b) <= tol * max(np.linalg.norm(b), 1e-30)


class TestModelConfig:

    def test_rejects_indivisible_heads(self):
        with pytest.raises(ConfigError):
            ModelConfig(num_layers=2, num_heads=5, model_dim=64, ffn_dim=128, vocab_size=256, max_positions=64)

    @pytest.mark.parametrize("field,value", [
        ("num_layers", 0), ("vocab_size", 1), ("max_positions", 1), ("ffn_dim", -3), ("weight_seed", -1)
    ])
    def test_rejects_invalid_fields(self, field, value):
        data = create_tiny_config().to_dict()
        data[field] = value
        with pytest.raises(ConfigError):
            ModelConfig.from_dict(data)

    def test_json_uses_field_names(self):
        config = create_tiny_config(num_layers=3)
        assert ModelConfig.from_json(config.to_json()) == config
        assert set(config.to_dict()) == {
            "num_layers", "num_heads", "model_dim", "ffn_dim", "vocab_size", "max_positions", "weight_seed"
        }

    def test_unknown_json_field_rejected(self):
        data = dict(create_tiny_config().to_dict(), dropout=0.1)
        with pytest.raises(ConfigError):
            ModelConfig.from_dict(data)

    def test_presets_are_valid(self):
        assert len(create_budget_variant_configs()) == 6
        assert all(c.head_dim == 128 for c in create_pruned_configs().values())


class TestInitModel:

    def test_same_config_same_logits(self, tiny_config):
        a, _ = prefill(init_model(tiny_config), [1, 2, 3])
        b, _ = prefill(init_model(tiny_config), [1, 2, 3])
        assert np.array_equal(a, b)

    def test_weight_seed_changes_weights(self, tiny_config):
        a, _ = prefill(init_model(tiny_config), [1, 2, 3])
        b, _ = prefill(init_model(tiny_config.with_overrides(weight_seed=1)), [1, 2, 3])
        assert not np.array_equal(a, b)

    def test_parameter_count_matches_counter(self):
        config = ModelConfig(num_layers=2, num_heads=2, model_dim=32, ffn_dim=64, vocab_size=256, max_positions=64)
        assert init_model(config).num_parameters() == count_params(config)

    def test_weights_are_read_only(self, tiny_config):
        model = init_model(tiny_config)
        with pytest.raises(ValueError):
            model.token_embedding[0, 0] = 1.0

    def test_logits_are_finite_float32(self, tiny_config):
        logits, _ = prefill(init_model(tiny_config), [5, 6])
        assert logits.shape == (tiny_config.vocab_size,)
        assert logits.dtype == np.float32
        assert np.all(np.isfinite(logits))


class TestPrefillDecode:

    def test_prefill_matches_decode_chain(self, tiny_config):
        model = init_model(tiny_config)
        tokens = [3, 17, 200]
        logits, cache = prefill(model, tokens)
        _, chain = prefill(model, tokens[:1])
        for token in tokens[1:]:
            stepped = decode_step(model, chain, token)
        assert _rel_close(logits, stepped)
        assert cache.length == chain.length == 3

    def test_equivalence_over_random_sequences(self, tiny_config):
        model = init_model(tiny_config)
        rng = np.random.default_rng(0)
        for length in (1, 2, 5, 16, 32):
            tokens = rng.integers(0, tiny_config.vocab_size, size=length).tolist()
            logits, _ = prefill(model, tokens)
            cache = model.new_cache()
            for token in tokens:
                stepped = decode_step(model, cache, token)
            assert _rel_close(logits, stepped)

    def test_incremental_consistency(self, tiny_config):
        model = init_model(tiny_config)
        _, cache = prefill(model, [4])
        stepped = decode_step(model, cache, 9)
        whole, _ = prefill(model, [4, 9])
        assert _rel_close(stepped, whole)

    def test_prefill_overflow(self):
        config = create_tiny_config(max_positions=8)
        with pytest.raises(ContextOverflowError):
            prefill(init_model(config), list(range(9)))

    def test_out_of_vocab(self, tiny_config):
        with pytest.raises(VocabularyError):
            prefill(init_model(tiny_config), [tiny_config.vocab_size])

    def test_empty_prompt(self, tiny_config):
        with pytest.raises(EmptyInputError):
            prefill(init_model(tiny_config), [])

    def test_decode_on_full_cache(self):
        config = create_tiny_config(max_positions=4)
        model = init_model(config)
        _, cache = prefill(model, [1, 2, 3, 4])
        with pytest.raises(ContextOverflowError):
            decode_step(model, cache, 5)

    def test_decode_is_deterministic(self, tiny_config):
        model = init_model(tiny_config)
        _, cache = prefill(model, [1, 2])
        first = decode_step(model, cache.copy(), 7)
        second = decode_step(model, cache.copy(), 7)
        assert np.array_equal(first, second)

    def test_cache_grows_by_one_per_step(self, tiny_config):
        model = init_model(tiny_config)
        _, cache = prefill(model, [1])
        for n in range(1, 6):
            decode_step(model, cache, n)
            assert cache.length == 1 + n
        assert cache.nbytes_used == 6 * 2 * tiny_config.num_layers * tiny_config.model_dim * 4

    def test_truncate_then_redecode(self, tiny_config):
        model = init_model(tiny_config)
        _, cache = prefill(model, [1, 2, 3])
        original = decode_step(model, cache, 4)
        cache.truncate(3)
        assert _rel_close(decode_step(model, cache, 4), original)
        with pytest.raises(ValueError):
            cache.truncate(10)
