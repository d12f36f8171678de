"""
Design Explorer - SpecDec Lab

Enumerates draft architectures at a fixed parameter budget, annotates them
with predicted latency and speculative throughput, and compares wide against
deep drafts.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Any, Sequence, Union

from src.errors import ConfigError, ValidationError
from src.model_core import ModelConfig
from src.perf_model import LatencyModel, throughput
from .params import ParamConvention, count_params, kv_bytes_per_token

logger = logging.getLogger(__name__)

TarEstimate = Union[float, Dict[int, float], Callable[[int], float]]


@dataclass
class ParamBudgetSpec:
    """
    Lattice of draft shapes around a parameter budget.

    ffn_dim candidates are ffn_dims when given, otherwise round(ratio * d_model)
    for ratio stepping from ffn_ratio_min to ffn_ratio_max. The default 2 to 4
    range never yields an FFN narrower than the model, so shallow wide shapes
    such as l=4, d_model=3584, ffn_dim=3448 only appear with explicit ffn_dims.
    """
    budget: float
    tolerance: float = 0.05
    depths: List[int] = field(default_factory=lambda: list(range(1, 25)))
    heads: List[int] = field(default_factory=lambda: list(range(1, 65)))
    head_dim: int = 64
    ffn_ratio_min: float = 2.0
    ffn_ratio_max: float = 4.0
    ffn_ratio_step: float = 0.5
    ffn_dims: Optional[List[int]] = None
    vocab_size: int = 50272
    max_positions: int = 2050
    convention: ParamConvention = field(default_factory=ParamConvention)

    def __post_init__(self):
        if isinstance(self.convention, dict):
            self.convention = ParamConvention.from_dict(self.convention)
        if not self.budget > 0:
            raise ConfigError(f"budget must be > 0, got {self.budget}")
        # 0 means exact match only.
        if not 0.0 <= self.tolerance <= 0.5:
            raise ConfigError(f"tolerance must lie in [0, 0.5], got {self.tolerance}")
        if not self.depths or min(self.depths) < 1:
            raise ConfigError("depths must be a non-empty list of positive integers")
        if not self.heads or min(self.heads) < 1:
            raise ConfigError("heads must be a non-empty list of positive integers")
        if self.head_dim < 1:
            raise ConfigError("head_dim must be positive")
        if self.ffn_dims is not None:
            if not self.ffn_dims or min(self.ffn_dims) < 1:
                raise ConfigError("ffn_dims must be a non-empty list of positive integers")
        elif not (0 < self.ffn_ratio_min <= self.ffn_ratio_max and self.ffn_ratio_step > 0):
            raise ConfigError("ffn ratio range must satisfy 0 < min <= max with a positive step")

    def ffn_candidates(self, model_dim: int) -> List[int]:
        if self.ffn_dims is not None:
            return sorted(set(self.ffn_dims))
        dims = []
        ratio = self.ffn_ratio_min
        while ratio <= self.ffn_ratio_max + 1e-9:
            dims.append(int(round(ratio * model_dim)))
            ratio += self.ffn_ratio_step
        return sorted(set(dims))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "budget": self.budget,
            "tolerance": self.tolerance,
            "depths": list(self.depths),
            "heads": list(self.heads),
            "head_dim": self.head_dim,
            "ffn_ratio_min": self.ffn_ratio_min,
            "ffn_ratio_max": self.ffn_ratio_max,
            "ffn_ratio_step": self.ffn_ratio_step,
            "ffn_dims": self.ffn_dims,
            "vocab_size": self.vocab_size,
            "max_positions": self.max_positions,
            "convention": self.convention.to_dict()
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ParamBudgetSpec":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"Unknown ParamBudgetSpec fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ParamBudgetSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise ConfigError(f"ParamBudgetSpec is not valid JSON: {e}") from e


@dataclass
class ConfigReport:
    config: ModelConfig
    params: int
    kv_bytes_per_token: int
    predicted_latency: Optional[float] = None
    predicted_throughput: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "l": self.config.num_layers,
            "h": self.config.num_heads,
            "d_model": self.config.model_dim,
            "d_inter": self.config.ffn_dim,
            "params": self.params,
            "kv_bytes_per_token": self.kv_bytes_per_token,
            "pred_latency_ms": None if self.predicted_latency is None else self.predicted_latency * 1e3,
            "pred_tput": self.predicted_throughput
        }


REPORT_COLUMNS = ["l", "h", "d_model", "d_inter", "params", "kv_bytes_per_token", "pred_latency_ms", "pred_tput"]


def _tar_for(estimate: TarEstimate, depth: int) -> float:
    if callable(estimate):
        return float(estimate(depth))
    if isinstance(estimate, dict):
        if depth not in estimate:
            raise ValidationError(f"No TAR estimate for depth {depth}")
        return float(estimate[depth])
    return float(estimate)


def _sort_key(report: ConfigReport):
    c = report.config
    if report.predicted_throughput is not None:
        return (-report.predicted_throughput, c.num_layers, c.model_dim, c.ffn_dim)
    if report.predicted_latency is not None:
        return (report.predicted_latency, c.num_layers, c.model_dim, c.ffn_dim)
    return (c.num_layers, c.model_dim, c.ffn_dim)


def enumerate_configs(spec: ParamBudgetSpec, latency_model: Optional[LatencyModel] = None,
                      tar_estimate: Optional[TarEstimate] = None, t_target: Optional[float] = None,
                      lookahead: int = 6) -> List[ConfigReport]:
    """
    Every (depth, heads, ffn_dim) lattice point whose parameter count lies
    within tolerance of the budget. Draft latency per iteration is lookahead
    decode steps.
    """
    if tar_estimate is not None and (latency_model is None or t_target is None):
        raise ConfigError("Ranking by throughput needs a latency model and t_target")

    reports: List[ConfigReport] = []
    for depth in spec.depths:
        for heads in spec.heads:
            model_dim = heads * spec.head_dim
            for ffn_dim in spec.ffn_candidates(model_dim):
                config = ModelConfig(depth, heads, model_dim, ffn_dim, spec.vocab_size, spec.max_positions)
                params = count_params(config, spec.convention)
                if abs(params - spec.budget) > spec.tolerance * spec.budget:
                    continue
                report = ConfigReport(config=config, params=params, kv_bytes_per_token=kv_bytes_per_token(config))
                if latency_model is not None:
                    report.predicted_latency = latency_model.predict(config)
                    if tar_estimate is not None:
                        report.predicted_throughput = throughput(
                            _tar_for(tar_estimate, depth), t_target, lookahead * report.predicted_latency
                        )
                reports.append(report)

    if not reports:
        logger.warning(f"No configuration within {spec.tolerance:.1%} of {spec.budget:.4g} parameters")
        return []
    reports.sort(key=_sort_key)
    logger.info(f"Enumerated {len(reports)} configurations near {spec.budget:.4g} parameters")
    return reports


@dataclass
class DraftCandidate:
    name: str
    tar: float
    t_draft: Optional[float] = None
    config: Optional[ModelConfig] = None


@dataclass
class CompareVerdict:
    winner: Optional[str]
    throughputs: Dict[str, float]
    draft_latencies: Dict[str, float]
    throughput_gain: float
    latency_reduction: float
    tar_margin: float

    @property
    def tie(self) -> bool:
        return self.winner is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "winner": self.winner,
            "tie": self.tie,
            "throughputs": self.throughputs,
            "draft_latencies": self.draft_latencies,
            "throughput_gain": self.throughput_gain,
            "latency_reduction": self.latency_reduction,
            "tar_margin": self.tar_margin
        }


def _draft_latency(candidate: DraftCandidate, lookahead: int,
                   measure: Optional[Callable[[ModelConfig], float]]) -> float:
    if candidate.t_draft is not None:
        return candidate.t_draft
    if candidate.config is None:
        raise ValidationError(f"{candidate.name}: needs either t_draft or a config to measure")
    if measure is None:
        from src.harness.timing import measure_decode_latency
        measure = lambda config: measure_decode_latency(config).median
    step = measure(candidate.config)
    logger.info(f"{candidate.name}: measured {step * 1e3:.3f} ms per decode step")
    return lookahead * step


def compare_wide_vs_deep(a: DraftCandidate, b: DraftCandidate, t_target: float, lookahead: int = 8,
                         measure: Optional[Callable[[ModelConfig], float]] = None,
                         rel_tol: float = 1e-12) -> CompareVerdict:
    """
    Combine each draft's TAR with its latency for lookahead tokens (measured
    when not given) and report the throughput winner. Margins are winner
    relative to loser: throughput gain, draft-latency reduction, TAR change.
    """
    latency_a = _draft_latency(a, lookahead, measure)
    latency_b = _draft_latency(b, lookahead, measure)
    tput_a = throughput(a.tar, t_target, latency_a)
    tput_b = throughput(b.tar, t_target, latency_b)
    throughputs = {a.name: tput_a, b.name: tput_b}
    latencies = {a.name: latency_a, b.name: latency_b}

    if abs(tput_a - tput_b) <= rel_tol * max(tput_a, tput_b):
        return CompareVerdict(winner=None, throughputs=throughputs, draft_latencies=latencies,
                              throughput_gain=0.0, latency_reduction=0.0, tar_margin=0.0)

    (win, win_tput, win_lat), (lose, lose_tput, lose_lat) = sorted(
        [(a, tput_a, latency_a), (b, tput_b, latency_b)], key=lambda item: -item[1]
    )
    verdict = CompareVerdict(
        winner=win.name,
        throughputs=throughputs,
        draft_latencies=latencies,
        throughput_gain=win_tput / lose_tput - 1.0,
        latency_reduction=1.0 - win_lat / lose_lat,
        tar_margin=win.tar / lose.tar - 1.0
    )
    logger.info(f"{win.name} beats {lose.name}: {win_tput:.2f} vs {lose_tput:.2f} tokens/s")
    return verdict
