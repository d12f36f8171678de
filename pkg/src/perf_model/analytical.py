"""
Analytical Throughput Model - SpecDec Lab

TAR-based throughput model, the alpha-based improvement factor / speedup model
it replaces, and the parity-latency, extra-TAR and required-TAR calculators.
All latencies are in seconds.
"""

import math
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Any, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from src.errors import ValidationError, EmptyInputError

logger = logging.getLogger(__name__)


@dataclass
class AnalyticalParams:
    tar: float
    t_target: float
    t_draft: float
    alpha: Optional[float] = None
    gamma: Optional[int] = None
    c: Optional[float] = None

    def __post_init__(self):
        if not self.tar > 0:
            raise ValidationError(f"TAR must be > 0, got {self.tar}")
        _require_positive(t_target=self.t_target, t_draft=self.t_draft)
        if self.alpha is not None:
            _check_alpha(self.alpha)
        if self.gamma is not None and self.gamma < 1:
            raise ValidationError(f"gamma must be >= 1, got {self.gamma}")
        if self.c is not None and not self.c > 0:
            raise ValidationError(f"c must be > 0, got {self.c}")

    @property
    def iteration_latency(self) -> float:
        return self.t_target + self.t_draft

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tar": self.tar,
            "t_target": self.t_target,
            "t_draft": self.t_draft,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "c": self.c
        }


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if value is None or not value > 0 or not math.isfinite(value):
            raise ValidationError(f"{name} must be a positive finite number, got {value}")


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}")


def predict_throughput(params: AnalyticalParams) -> float:
    """TAR / (t_target + t_draft) when TAR > 1, otherwise one token per iteration."""
    return max(params.tar, 1.0) / params.iteration_latency


def throughput(tar: float, t_target: float, t_draft: float) -> float:
    return predict_throughput(AnalyticalParams(tar=tar, t_target=t_target, t_draft=t_draft))


def improvement_factor(alpha: float, gamma: int) -> float:
    """Expected tokens per iteration under i.i.d. acceptance: (1 - alpha^(gamma+1)) / (1 - alpha)."""
    _check_alpha(alpha)
    if gamma < 1:
        raise ValidationError(f"gamma must be >= 1, got {gamma}")
    if alpha == 1.0:
        return float(gamma + 1)
    return (1.0 - alpha ** (gamma + 1)) / (1.0 - alpha)


def leviathan_speedup(alpha: float, gamma: int, c: float) -> float:
    _require_positive(c=c)
    return improvement_factor(alpha, gamma) / (gamma * c + 1.0)


def alpha_from_tar(tar: float, gamma: int) -> float:
    """Acceptance rate whose improvement factor equals the measured TAR."""
    if not 1.0 <= tar <= gamma + 1:
        raise ValidationError(f"TAR {tar} is outside [1, {gamma + 1}] for gamma={gamma}")
    if tar == 1.0:
        return 0.0
    if tar == gamma + 1:
        return 1.0
    return float(brentq(lambda a: improvement_factor(a, gamma) - tar, 0.0, 1.0, xtol=1e-14))


def latency_reduction(latency: float, parity: float) -> float:
    """Percent reduction that takes a draft from its latency down to the parity latency."""
    _require_positive(latency=latency)
    return 100.0 * (1.0 - parity / latency)


Candidate = Union[Tuple[float, float], Any]


def _unpack(candidate: Candidate) -> Tuple[float, float]:
    if hasattr(candidate, "tar") and hasattr(candidate, "t_draft"):
        return float(candidate.tar), float(candidate.t_draft)
    tar, t_draft = candidate
    return float(tar), float(t_draft)


@dataclass
class ParityResult:
    parity_latency: float
    reduction_pct: float
    clamped: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "parity_latency": self.parity_latency,
            "reduction_pct": self.reduction_pct,
            "clamped": self.clamped
        }


def parity_latency(candidate: Candidate, baseline_throughput: float, t_target: float) -> ParityResult:
    """Draft latency at which the candidate's throughput equals the baseline's."""
    tar, t_draft = _unpack(candidate)
    _require_positive(tar=tar, t_draft=t_draft, baseline_throughput=baseline_throughput, t_target=t_target)
    parity = tar / baseline_throughput - t_target
    clamped = parity < 0
    if clamped:
        logger.warning(f"Parity unreachable even with a zero-latency draft (TAR {tar}); clamping to 0")
        parity = 0.0
    return ParityResult(parity_latency=parity, reduction_pct=latency_reduction(t_draft, parity), clamped=clamped)


@dataclass
class ExtraTarResult:
    needed: float
    extra: Optional[float]
    feasible: bool
    cap: int

    def to_dict(self) -> Dict[str, Any]:
        return {"needed_tar": self.needed, "extra_tar": self.extra, "feasible": self.feasible, "cap": self.cap}


def extra_tar(candidate: Candidate, baseline_throughput: float, t_target: float, gamma: int) -> ExtraTarResult:
    """TAR the candidate must add to match the baseline; infeasible beyond the gamma + 1 cap."""
    tar, t_draft = _unpack(candidate)
    _require_positive(tar=tar, t_draft=t_draft, baseline_throughput=baseline_throughput, t_target=t_target)
    if gamma < 1:
        raise ValidationError(f"gamma must be >= 1, got {gamma}")
    needed = required_tar(baseline_throughput, t_target, t_draft)
    cap = gamma + 1
    if needed > cap:
        logger.warning(f"Needed TAR {needed:.2f} exceeds the cap of {cap}; candidate cannot reach parity")
        return ExtraTarResult(needed=needed, extra=None, feasible=False, cap=cap)
    return ExtraTarResult(needed=needed, extra=needed - tar, feasible=True, cap=cap)


def required_tar(target_throughput: float, t_target: float, t_draft: float) -> float:
    _require_positive(target_throughput=target_throughput, t_target=t_target, t_draft=t_draft)
    return target_throughput * (t_target + t_draft)


@dataclass
class RequiredTarResult:
    required: float
    reachable: bool
    cap: int


def check_required_tar(target_throughput: float, t_target: float, t_draft: float, gamma: int) -> RequiredTarResult:
    required = required_tar(target_throughput, t_target, t_draft)
    return RequiredTarResult(required=required, reachable=required <= gamma + 1, cap=gamma + 1)


@dataclass
class ThroughputObservation:
    """A measured run: TAR, mean per-iteration phase latencies, observed tokens/s."""
    name: str
    tar: float
    t_draft: float
    t_target: float
    measured_throughput: float


@dataclass
class PredictionCheck:
    rows: List[Dict[str, Any]]
    median_error: float
    max_error: float

    def to_dict(self) -> Dict[str, Any]:
        return {"rows": self.rows, "median_error": self.median_error, "max_error": self.max_error}


def validate_predictions(observations: Sequence[ThroughputObservation]) -> PredictionCheck:
    """Relative error of the analytical prediction against each measured throughput."""
    if not observations:
        raise EmptyInputError("validate_predictions needs at least one observation")
    rows = []
    for obs in observations:
        predicted = throughput(obs.tar, obs.t_target, obs.t_draft)
        _require_positive(measured_throughput=obs.measured_throughput)
        error = abs(predicted - obs.measured_throughput) / obs.measured_throughput
        rows.append({
            "model": obs.name,
            "tar": obs.tar,
            "predicted": predicted,
            "measured": obs.measured_throughput,
            "relative_error": error
        })
    errors = np.array([r["relative_error"] for r in rows])
    check = PredictionCheck(rows=rows, median_error=float(np.median(errors)), max_error=float(errors.max()))
    logger.info(f"Prediction error over {len(rows)} runs: median {check.median_error:.2%}, max {check.max_error:.2%}")
    return check
