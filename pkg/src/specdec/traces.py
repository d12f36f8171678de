"""
Traces and Run Statistics - SpecDec Lab

Per-iteration records and the aggregates derived from them (TAR, acceptance
rate, throughput, phase breakdown).
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Any, Sequence, Tuple

from src.errors import EmptyInputError, ValidationError

logger = logging.getLogger(__name__)


@dataclass
class IterationTrace:
    """One draft/verify cycle. Autoregressive steps are recorded with proposed = 0."""
    proposed: int
    accepted: int
    emitted: int
    draft_time: float
    verify_time: float
    iteration_time: float

    def __post_init__(self):
        if not 0 <= self.accepted <= self.proposed:
            raise ValidationError(f"accepted={self.accepted} must lie in [0, proposed={self.proposed}]")
        if self.emitted not in (self.accepted, self.accepted + 1):
            raise ValidationError(f"emitted={self.emitted} must be accepted or accepted + 1")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "proposed": self.proposed,
            "accepted": self.accepted,
            "emitted": self.emitted,
            "draft_time": self.draft_time,
            "verify_time": self.verify_time,
            "iteration_time": self.iteration_time
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IterationTrace":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


def timed_window(traces: Sequence[IterationTrace], warmup: int) -> List[IterationTrace]:
    """Drop warm-up iterations, unless that would leave nothing to time."""
    traces = list(traces)
    if len(traces) > warmup:
        return traces[warmup:]
    if traces and warmup:
        logger.warning(f"Run has {len(traces)} iterations, not more than warm-up {warmup}; timing all of them")
    return traces


@dataclass
class RunStats:
    output: List[int]
    traces: List[IterationTrace] = field(default_factory=list)
    mode: str = "speculative"
    lookahead: Optional[int] = None
    target_passes: int = 0
    warmup_iterations: int = 3

    @property
    def iterations(self) -> int:
        return len(self.traces)

    @property
    def emitted_tokens(self) -> int:
        return sum(t.emitted for t in self.traces)

    @property
    def tar(self) -> float:
        """Mean tokens emitted per iteration, bonus token included."""
        return self.emitted_tokens / self.iterations if self.traces else 0.0

    @property
    def acceptance_rate(self) -> Optional[float]:
        proposed = sum(t.proposed for t in self.traces)
        if proposed == 0:
            return None
        return sum(t.accepted for t in self.traces) / proposed

    @property
    def timed_traces(self) -> List[IterationTrace]:
        return timed_window(self.traces, self.warmup_iterations)

    @property
    def total_draft_time(self) -> float:
        return sum(t.draft_time for t in self.timed_traces)

    @property
    def total_verify_time(self) -> float:
        return sum(t.verify_time for t in self.timed_traces)

    @property
    def total_time(self) -> float:
        return sum(t.iteration_time for t in self.timed_traces)

    @property
    def throughput(self) -> float:
        timed = self.timed_traces
        elapsed = sum(t.iteration_time for t in timed)
        if elapsed <= 0:
            return 0.0
        return sum(t.emitted for t in timed) / elapsed

    @property
    def mean_draft_time(self) -> float:
        timed = self.timed_traces
        return self.total_draft_time / len(timed) if timed else 0.0

    @property
    def mean_verify_time(self) -> float:
        timed = self.timed_traces
        return self.total_verify_time / len(timed) if timed else 0.0

    def to_dict(self, include_traces: bool = False) -> Dict[str, Any]:
        summary = {
            "mode": self.mode,
            "lookahead": self.lookahead,
            "iterations": self.iterations,
            "emitted_tokens": self.emitted_tokens,
            "tar": self.tar,
            "acceptance_rate": self.acceptance_rate,
            "throughput": self.throughput,
            "total_draft_time": self.total_draft_time,
            "total_verify_time": self.total_verify_time,
            "total_time": self.total_time,
            "target_passes": self.target_passes,
            "warmup_iterations": self.warmup_iterations,
            "output": list(self.output)
        }
        if include_traces:
            summary["traces"] = [t.to_dict() for t in self.traces]
        return summary

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def measure_breakdown(traces: Sequence[IterationTrace]) -> Tuple[float, float]:
    """(draft fraction, verify fraction) of the summed phase time."""
    if not traces:
        raise EmptyInputError("measure_breakdown needs at least one trace")
    draft = sum(t.draft_time for t in traces)
    verify = sum(t.verify_time for t in traces)
    total = draft + verify
    if total <= 0:
        raise EmptyInputError("Traces carry no recorded phase time")
    draft_fraction = draft / total
    return draft_fraction, 1.0 - draft_fraction


def export_traces_jsonl(traces: Sequence[IterationTrace], path: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_suffix(target.suffix + ".tmp")
    with tmp.open("w", encoding="utf-8") as handle:
        for trace in traces:
            handle.write(json.dumps(trace.to_dict(), sort_keys=True) + "\n")
    tmp.replace(target)
    logger.info(f"Wrote {len(traces)} traces to {target}")
    return target


def load_traces_jsonl(path: str) -> List[IterationTrace]:
    with open(path, encoding="utf-8") as handle:
        return [IterationTrace.from_dict(json.loads(line)) for line in handle if line.strip()]
