"""
Timing - SpecDec Lab

Microbenchmark discipline (warm-up, then median and median absolute deviation
over repetitions) and the decode-latency series behind the depth and width
studies.
"""

import time
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Any, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from src.errors import ConfigError
from src.model_core import ModelConfig, init_model, create_tiny_config
from src.perf_model import LatencySample, LatencyModel, fit_latency_model
from src.design_explorer import ParamBudgetSpec, ParamConvention, count_params, enumerate_configs

logger = logging.getLogger(__name__)

DEFAULT_REPETITIONS = 30
DEFAULT_WARMUP = 3
# BLAS thread count held while timing.
BLAS_THREADS = 1


@dataclass
class TimingSummary:
    median: float
    mad: float
    samples: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"median_ms": self.median * 1e3, "mad_ms": self.mad * 1e3, "repetitions": len(self.samples)}


def microbenchmark(fn: Callable[[], Any], repetitions: int = DEFAULT_REPETITIONS, warmup: int = DEFAULT_WARMUP,
                   clock: Callable[[], float] = time.perf_counter,
                   threads: Optional[int] = BLAS_THREADS) -> TimingSummary:
    """Warm-up and timed calls run under a BLAS thread limit; threads=None leaves the pools alone."""
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if warmup < 0:
        raise ConfigError("warmup must be >= 0")
    if threads is not None and threads < 1:
        raise ConfigError("threads must be >= 1")
    samples = []
    with threadpool_limits(limits=threads):
        for _ in range(warmup):
            fn()
        for _ in range(repetitions):
            start = clock()
            fn()
            samples.append(clock() - start)
    values = np.asarray(samples)
    median = float(np.median(values))
    return TimingSummary(median=median, mad=float(np.median(np.abs(values - median))), samples=samples)


def measure_decode_latency(config: ModelConfig, repetitions: int = DEFAULT_REPETITIONS,
                           warmup: int = DEFAULT_WARMUP, context_length: int = 16) -> TimingSummary:
    """Seconds per decode step at a fixed context length (cache rewound between samples)."""
    if not 1 <= context_length < config.max_positions:
        raise ConfigError(f"context_length must lie in [1, {config.max_positions})")
    model = init_model(config)
    prompt = [i % config.vocab_size for i in range(context_length)]
    _, cache = model.prefill(prompt)
    token = context_length % config.vocab_size

    def step():
        model.decode_step(cache, token)
        cache.truncate(context_length)

    summary = microbenchmark(step, repetitions=repetitions, warmup=warmup)
    logger.debug(f"l={config.num_layers} d={config.model_dim}: {summary.median * 1e3:.4f} ms/step")
    return summary


def _series_row(config: ModelConfig, summary: TimingSummary) -> Dict[str, Any]:
    return {
        "layers": config.num_layers,
        "model_dim": config.model_dim,
        "ffn_dim": config.ffn_dim,
        "params": count_params(config),
        "median_ms": summary.median * 1e3,
        "mad_ms": summary.mad * 1e3
    }


@dataclass
class LatencySeries:
    rows: List[Dict[str, Any]]
    samples: List[LatencySample]

    def fit(self) -> LatencyModel:
        return fit_latency_model(self.samples)


def _measure_series(configs: Sequence[ModelConfig], repetitions: int, warmup: int,
                    context_length: int) -> LatencySeries:
    rows, samples = [], []
    for config in configs:
        summary = measure_decode_latency(config, repetitions, warmup, context_length)
        rows.append(_series_row(config, summary))
        samples.append(LatencySample(config=config, seconds=summary.median))
    return LatencySeries(rows=rows, samples=samples)


def depth_series(depths: Sequence[int] = (1, 2, 4, 8, 16), model_dim: int = 64, num_heads: int = 4,
                 repetitions: int = DEFAULT_REPETITIONS, warmup: int = DEFAULT_WARMUP,
                 context_length: int = 16) -> LatencySeries:
    configs = [create_tiny_config(num_layers=l, model_dim=model_dim, num_heads=num_heads) for l in sorted(depths)]
    return _measure_series(configs, repetitions, warmup, context_length)


def width_series(widths: Sequence[int] = (64, 128, 256), num_layers: int = 4, head_dim: int = 16,
                 repetitions: int = DEFAULT_REPETITIONS, warmup: int = DEFAULT_WARMUP,
                 context_length: int = 16) -> LatencySeries:
    configs = [create_tiny_config(num_layers=num_layers, model_dim=w, num_heads=max(1, w // head_dim))
               for w in sorted(widths)]
    return _measure_series(configs, repetitions, warmup, context_length)


def width_ratio(model_dim: int = 64, num_layers: int = 4, head_dim: int = 16,
                repetitions: int = DEFAULT_REPETITIONS, warmup: int = DEFAULT_WARMUP) -> float:
    """Latency ratio when per-layer width doubles at fixed depth (4x FLOPs per matmul, 2x width)."""
    series = width_series((model_dim, 2 * model_dim), num_layers, head_dim, repetitions, warmup)
    narrow, wide = series.rows
    ratio = wide["median_ms"] / narrow["median_ms"]
    logger.info(f"Doubling width {model_dim}->{2 * model_dim} at l={num_layers}: latency x{ratio:.3f}")
    return ratio


def budget_series(budget: float, depths: Sequence[int], head_dim: int = 16, ffn_ratio: float = 4.0,
                  tolerance: float = 0.25, vocab_size: int = 257, max_positions: int = 128,
                  repetitions: int = DEFAULT_REPETITIONS, warmup: int = DEFAULT_WARMUP,
                  context_length: int = 16) -> LatencySeries:
    """For each depth, the enumerated config closest to a desk-scale budget, then timed."""
    spec = ParamBudgetSpec(
        budget=budget, tolerance=tolerance, depths=list(depths), heads=list(range(1, 65)), head_dim=head_dim,
        ffn_ratio_min=ffn_ratio, ffn_ratio_max=ffn_ratio, ffn_ratio_step=1.0,
        vocab_size=vocab_size, max_positions=max_positions, convention=ParamConvention()
    )
    reports = enumerate_configs(spec)
    configs = []
    for depth in sorted(set(depths)):
        candidates = [r for r in reports if r.config.num_layers == depth]
        if not candidates:
            logger.warning(f"No config at depth {depth} within {tolerance:.0%} of {budget:.4g}")
            continue
        configs.append(min(candidates, key=lambda r: abs(r.params - budget)).config)
    return _measure_series(configs, repetitions, warmup, context_length)
