"""
SpecDec Lab - Performance Model

Analytical throughput model, latency fitting and what-if calculators.
"""

from .analytical import (
    AnalyticalParams,
    predict_throughput,
    throughput,
    improvement_factor,
    leviathan_speedup,
    alpha_from_tar,
    latency_reduction,
    ParityResult,
    parity_latency,
    ExtraTarResult,
    extra_tar,
    required_tar,
    RequiredTarResult,
    check_required_tar,
    ThroughputObservation,
    PredictionCheck,
    validate_predictions
)
from .latency_model import LatencySample, LatencyModel, fit_latency_model, layer_flops
from .what_if import (
    DraftMeasurement,
    load_measurements,
    parity_table,
    extra_tar_table,
    required_tar_curve,
    write_what_if
)

__all__ = [
    'AnalyticalParams',
    'predict_throughput',
    'throughput',
    'improvement_factor',
    'leviathan_speedup',
    'alpha_from_tar',
    'latency_reduction',
    'ParityResult',
    'parity_latency',
    'ExtraTarResult',
    'extra_tar',
    'required_tar',
    'RequiredTarResult',
    'check_required_tar',
    'ThroughputObservation',
    'PredictionCheck',
    'validate_predictions',
    'LatencySample',
    'LatencyModel',
    'fit_latency_model',
    'layer_flops',
    'DraftMeasurement',
    'load_measurements',
    'parity_table',
    'extra_tar_table',
    'required_tar_curve',
    'write_what_if'
]
