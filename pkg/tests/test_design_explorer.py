"""Tests for parameter counting, KV sizing and budgeted enumeration."""

import json

import pytest

from src.errors import ConfigError, ValidationError
from src.model_core import (
    ModelConfig, create_opt_125m_config, create_opt_350m_config, create_budget_variant_configs, create_pruned_configs,
    create_tiny_config
)
from src.perf_model import LatencyModel
from src.design_explorer import (
    ParamConvention, create_opt350m_convention, create_llama_convention, count_params, param_formula,
    kv_bytes, kv_bytes_per_token, kv_saving, ParamBudgetSpec, REPORT_COLUMNS, enumerate_configs,
    DraftCandidate, compare_wide_vs_deep
)

OPT_125M_HAND_COUNT = (
    50272 * 768          # token embeddings, tied with the LM head
    + 2050 * 768         # learned positions
    + 12 * (
        4 * 768 * 768 + 4 * 768              # q, k, v, o with biases
        + 2 * 768 * 3072 + 3072 + 768        # fc1, fc2 with biases
        + 2 * 2 * 768                        # two LayerNorms
    )
    + 2 * 768                                # final LayerNorm
)


class TestCountParams:

    def test_opt_125m(self):
        count = count_params(create_opt_125m_config())
        assert count == OPT_125M_HAND_COUNT == 125239296
        assert abs(count - 125e6) / 125e6 < 0.01

    def test_budget_variants_share_the_opt350m_budget(self):
        convention = create_opt350m_convention()
        reference = count_params(create_opt_350m_config(), convention)
        assert reference == 331196416
        # Against a flat 3.5e8 the l=24 row sits at -5.37% and the l=8 row at -5.72%,
        # so the 5% band is taken around the OPT-350M count itself.
        by_depth = {c.num_layers: count_params(c, convention) for c in create_budget_variant_configs()}
        assert (by_depth[24] - 3.5e8) / 3.5e8 == pytest.approx(-0.0537, abs=1e-4)
        assert (by_depth[8] - 3.5e8) / 3.5e8 == pytest.approx(-0.0572, abs=1e-4)
        for config in create_budget_variant_configs():
            assert abs(count_params(config, convention) - reference) / reference <= 0.05

    def test_widest_budget_variant_near_350m(self):
        widest = create_budget_variant_configs()[-1]
        assert (widest.num_layers, widest.model_dim) == (4, 3584)
        assert abs(count_params(widest, create_opt350m_convention()) - 3.5e8) / 3.5e8 <= 0.05

    def test_ffn_linearity(self):
        config = create_opt_125m_config()
        wider = config.with_overrides(ffn_dim=config.ffn_dim + 100)
        delta = count_params(wider) - count_params(config)
        assert delta == 2 * config.num_layers * config.model_dim * 100 + config.num_layers * 100

    def test_monotone(self):
        config = create_tiny_config()
        base = count_params(config)
        assert count_params(config.with_overrides(num_layers=3)) > base
        assert count_params(config.with_overrides(model_dim=64, num_heads=2)) > base
        assert count_params(config.with_overrides(ffn_dim=65)) > base

    def test_llama_convention(self):
        config = ModelConfig(1, 1, 4, 8, 10, 16)
        # 2 embeddings, gated FFN, RMSNorm gains, no biases or positions.
        assert count_params(config, create_llama_convention()) == 2 * 10 * 4 + (4 * 16 + 3 * 4 * 8 + 2 * 4) + 4

    def test_formula_is_reported(self):
        assert param_formula() == "V*d + P*d + l*[4d^2 + 4d + 2*d*f + f + d + 2*2d] + 2d"
        assert "3*d*f" in param_formula(create_llama_convention())

    def test_convention_round_trip(self):
        convention = create_opt350m_convention()
        assert ParamConvention.from_dict(convention.to_dict()) == convention
        with pytest.raises(ConfigError):
            ParamConvention.from_dict({"rotary": True})


class TestKvBytes:

    def test_wide_vs_deep_ratio(self):
        pruned = create_pruned_configs()
        wide, deep = pruned["pruned-wide-1.3b"], pruned["pruned-1.3b"]
        assert kv_bytes_per_token(wide) / kv_bytes_per_token(deep) == 0.625
        assert kv_saving(wide, deep) == pytest.approx(0.375)

    def test_zero_layers(self):
        assert kv_bytes(0, 4096) == 0

    def test_doubling_layers(self):
        config = create_opt_125m_config()
        assert kv_bytes_per_token(config.with_overrides(num_layers=24)) == 2 * kv_bytes_per_token(config)
        assert kv_bytes_per_token(config) == 2 * 12 * 768 * 2


class TestParamBudgetSpec:

    @pytest.mark.parametrize("changes", [
        {"budget": 0}, {"tolerance": 0.6}, {"tolerance": -0.1}, {"depths": []}, {"heads": [0]},
        {"ffn_ratio_min": 4.0, "ffn_ratio_max": 2.0}
    ])
    def test_rejects_invalid(self, changes):
        with pytest.raises(ConfigError):
            ParamBudgetSpec(**dict({"budget": 3.5e8}, **changes))

    def test_json_round_trip(self):
        spec = ParamBudgetSpec(budget=3.5e8, depths=[4, 8], ffn_dims=[3448], convention=create_opt350m_convention())
        restored = ParamBudgetSpec.from_json(json.dumps(spec.to_dict()))
        assert restored.to_dict() == spec.to_dict()

    def test_ffn_ratio_candidates(self):
        spec = ParamBudgetSpec(budget=1e6)
        assert spec.ffn_candidates(100) == [200, 250, 300, 350, 400]


class TestEnumerateConfigs:

    @pytest.fixture
    def budget_spec(self):
        return ParamBudgetSpec(budget=3.5e8, tolerance=0.06, depths=[4, 8, 12, 16, 20, 24], head_dim=64,
                               ffn_dims=[3448, 4096], convention=create_opt350m_convention())

    def test_includes_budget_variants(self, budget_spec):
        shapes = {(r.config.num_layers, r.config.num_heads, r.config.model_dim, r.config.ffn_dim)
                  for r in enumerate_configs(budget_spec)}
        for config in create_budget_variant_configs():
            assert (config.num_layers, config.num_heads, config.model_dim, config.ffn_dim) in shapes

    def test_every_report_within_tolerance(self, budget_spec):
        for report in enumerate_configs(budget_spec):
            assert abs(report.params - 3.5e8) <= 0.06 * 3.5e8
            assert list(report.to_dict()) == REPORT_COLUMNS

    def test_zero_tolerance_can_be_empty(self):
        spec = ParamBudgetSpec(budget=1234567, tolerance=0.0, depths=[1, 2], heads=[1, 2, 3], head_dim=16,
                               ffn_dims=[64], vocab_size=257, max_positions=128)
        assert enumerate_configs(spec) == []

    def test_default_ratios_miss_ffn_narrower_than_model(self):
        shallow_wide = dict(budget=3.5e8, depths=[4], heads=[56], head_dim=64,
                            convention=create_opt350m_convention())
        assert enumerate_configs(ParamBudgetSpec(**shallow_wide)) == []
        reports = enumerate_configs(ParamBudgetSpec(ffn_dims=[3448], **shallow_wide))
        assert [(r.config.model_dim, r.config.ffn_dim) for r in reports] == [(3584, 3448)]

    def test_ranked_by_predicted_throughput(self, budget_spec):
        latency_model = LatencyModel(slope=0.001, intercept=0.002)
        reports = enumerate_configs(budget_spec, latency_model, tar_estimate=3.0, t_target=0.05, lookahead=6)
        tputs = [r.predicted_throughput for r in reports]
        assert tputs == sorted(tputs, reverse=True)
        assert reports[0].config.num_layers == 4

    def test_shallower_predicts_lower_latency(self):
        spec = ParamBudgetSpec(budget=3.5e8, tolerance=0.5, depths=[16, 24], heads=[16], head_dim=64,
                               ffn_dims=[4096], convention=create_opt350m_convention())
        reports = enumerate_configs(spec, LatencyModel(slope=0.001, intercept=0.002))
        by_depth = {r.config.num_layers: r.predicted_latency for r in reports}
        assert by_depth[16] < by_depth[24]

    def test_tar_by_depth(self, budget_spec):
        estimate = {4: 2.8, 8: 3.0, 12: 3.1, 16: 3.2, 20: 3.3, 24: 3.4}
        reports = enumerate_configs(budget_spec, LatencyModel(slope=0.001, intercept=0.002),
                                    tar_estimate=estimate, t_target=0.05)
        assert all(r.predicted_throughput > 0 for r in reports)

    def test_ranking_needs_latency_model(self, budget_spec):
        with pytest.raises(ConfigError):
            enumerate_configs(budget_spec, tar_estimate=3.0, t_target=0.05)


class TestCompareWideVsDeep:

    def test_wide_draft_wins(self):
        deep = DraftCandidate("pruned-1.3b", tar=3.81, t_draft=105.1e-3)
        wide = DraftCandidate("pruned-wide-1.3b", tar=3.70, t_draft=53.5e-3)
        verdict = compare_wide_vs_deep(deep, wide, t_target=60.03e-3)
        assert verdict.winner == "pruned-wide-1.3b"
        assert verdict.throughputs["pruned-wide-1.3b"] == pytest.approx(32.59, abs=0.01)
        assert verdict.throughput_gain == pytest.approx(0.41, abs=0.01)
        assert verdict.latency_reduction == pytest.approx(0.49, abs=0.01)
        assert verdict.tar_margin == pytest.approx(-0.029, abs=0.001)

    def test_identical_inputs_tie(self):
        a = DraftCandidate("a", tar=3.0, t_draft=0.05)
        b = DraftCandidate("b", tar=3.0, t_draft=0.05)
        verdict = compare_wide_vs_deep(a, b, t_target=0.06)
        assert verdict.tie
        assert verdict.to_dict()["winner"] is None

    def test_floor_branch_for_low_tar(self):
        a = DraftCandidate("a", tar=0.5, t_draft=0.04)
        b = DraftCandidate("b", tar=1.0, t_draft=0.04)
        verdict = compare_wide_vs_deep(a, b, t_target=0.06)
        assert verdict.tie
        assert verdict.throughputs["a"] == pytest.approx(10.0)

    def test_measures_configs(self):
        wide = DraftCandidate("wide", tar=3.0, config=create_tiny_config(num_layers=1, model_dim=64, num_heads=4))
        deep = DraftCandidate("deep", tar=3.0, config=create_tiny_config(num_layers=8, model_dim=32))
        latencies = {1: 0.001, 8: 0.004}
        verdict = compare_wide_vs_deep(wide, deep, t_target=0.05, lookahead=8,
                                       measure=lambda config: latencies[config.num_layers])
        assert verdict.winner == "wide"
        assert verdict.draft_latencies == {"wide": pytest.approx(0.008), "deep": pytest.approx(0.032)}

    def test_candidate_needs_latency_or_config(self):
        with pytest.raises(ValidationError):
            compare_wide_vs_deep(DraftCandidate("a", tar=2.0), DraftCandidate("b", tar=2.0, t_draft=0.01), 0.05)
