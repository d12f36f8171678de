"""
SpecDec Lab - Bench Harness

Experiments, corpus ingestion, timing discipline, plot data and the CLI.
"""

from .experiment import ExperimentKind, ExperimentSpec, ResultRecord, environment_fingerprint, TIMED_KINDS
from .corpus import ingest_corpus, read_records, generate_markov_corpus, split_prompts
from .timing import (
    TimingSummary,
    microbenchmark,
    measure_decode_latency,
    LatencySeries,
    depth_series,
    width_series,
    width_ratio,
    budget_series
)
from .plotdata import emit_plotdata, SCHEMAS, SCHEMA_VERSION
from .pipelines import build_language_model, PIPELINES
from .runner import run_experiment, TIMING_LOCK

__all__ = [
    'ExperimentKind',
    'ExperimentSpec',
    'ResultRecord',
    'environment_fingerprint',
    'TIMED_KINDS',
    'ingest_corpus',
    'read_records',
    'generate_markov_corpus',
    'split_prompts',
    'TimingSummary',
    'microbenchmark',
    'measure_decode_latency',
    'LatencySeries',
    'depth_series',
    'width_series',
    'width_ratio',
    'budget_series',
    'emit_plotdata',
    'SCHEMAS',
    'SCHEMA_VERSION',
    'build_language_model',
    'PIPELINES',
    'run_experiment',
    'TIMING_LOCK'
]
