"""
SpecDec Lab - Speculative Decoding Engine

Draft-then-verify generation with greedy and sampled verification.
"""

from .config import SamplingPolicy, SpecRunConfig, create_greedy_config, create_sampling_config
from .traces import (
    IterationTrace,
    RunStats,
    measure_breakdown,
    export_traces_jsonl,
    load_traces_jsonl
)
from .verification import (
    Verdict,
    split_seed,
    sample_token,
    verify_greedy,
    verify_sampled,
    emitted_token_distribution,
    total_variation
)
from .engine import (
    generate_autoregressive,
    generate_speculative,
    sweep_lookahead,
    summarize_runs,
    LookaheadSweep,
    SweepRow
)

__all__ = [
    'SamplingPolicy',
    'SpecRunConfig',
    'create_greedy_config',
    'create_sampling_config',
    'IterationTrace',
    'RunStats',
    'measure_breakdown',
    'export_traces_jsonl',
    'load_traces_jsonl',
    'Verdict',
    'split_seed',
    'sample_token',
    'verify_greedy',
    'verify_sampled',
    'emitted_token_distribution',
    'total_variation',
    'generate_autoregressive',
    'generate_speculative',
    'sweep_lookahead',
    'summarize_runs',
    'LookaheadSweep',
    'SweepRow'
]
