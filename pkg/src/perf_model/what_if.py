"""
What-If Tables - SpecDec Lab

Parity-latency, extra-TAR and required-TAR tables computed from a measurement
CSV with columns model_id, tar, t_draft_ms, t_target_ms. The baseline is the
designated model id, or the first row.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Any, Sequence

from src.errors import SchemaMismatchError, ValidationError, EmptyInputError
from src.fileio import read_csv, write_csv, write_json
from .analytical import throughput, parity_latency, extra_tar, check_required_tar

logger = logging.getLogger(__name__)

MEASUREMENT_COLUMNS = ["model_id", "tar", "t_draft_ms", "t_target_ms"]


@dataclass
class DraftMeasurement:
    model_id: str
    tar: float
    t_draft_ms: float
    t_target_ms: float

    def __post_init__(self):
        for name in ("tar", "t_draft_ms", "t_target_ms"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{self.model_id}: {name} must be > 0")

    @property
    def t_draft(self) -> float:
        return self.t_draft_ms / 1e3

    @property
    def t_target(self) -> float:
        return self.t_target_ms / 1e3

    @property
    def throughput(self) -> float:
        return throughput(self.tar, self.t_target, self.t_draft)

    def to_dict(self) -> Dict[str, Any]:
        return {"model_id": self.model_id, "tar": self.tar,
                "t_draft_ms": self.t_draft_ms, "t_target_ms": self.t_target_ms}


def load_measurements(path: str) -> List[DraftMeasurement]:
    if not Path(path).exists():
        raise ValidationError(f"Measurement file not found: {path}")
    rows = read_csv(path)
    if not rows:
        raise EmptyInputError(f"{path} has no measurement rows")
    missing = [c for c in MEASUREMENT_COLUMNS if c not in rows[0]]
    if missing:
        raise SchemaMismatchError(f"{path} is missing columns {missing}")
    measurements = []
    for line, row in enumerate(rows, start=2):
        try:
            measurements.append(DraftMeasurement(
                model_id=row["model_id"],
                tar=float(row["tar"]),
                t_draft_ms=float(row["t_draft_ms"]),
                t_target_ms=float(row["t_target_ms"])
            ))
        except (TypeError, ValueError) as e:
            raise SchemaMismatchError(f"{path} line {line}: {e}") from e
    return measurements


def _baseline(measurements: Sequence[DraftMeasurement], baseline_id: Optional[str]) -> DraftMeasurement:
    if not measurements:
        raise EmptyInputError("No measurements given")
    if baseline_id is None:
        return measurements[0]
    for m in measurements:
        if m.model_id == baseline_id:
            return m
    raise ValidationError(f"Baseline model {baseline_id!r} not in measurements")


def parity_table(measurements: Sequence[DraftMeasurement], baseline_id: Optional[str] = None) -> List[Dict[str, Any]]:
    baseline = _baseline(measurements, baseline_id)
    baseline_tput = baseline.throughput
    rows = []
    for m in measurements:
        result = parity_latency(m, baseline_tput, m.t_target)
        rows.append({
            "model": m.model_id,
            "latency": m.t_draft_ms,
            "parity_latency": round(result.parity_latency * 1e3, 6),
            "reduction_pct": round(result.reduction_pct, 6),
            "clamped": result.clamped
        })
    return rows


def extra_tar_table(measurements: Sequence[DraftMeasurement], gamma: int,
                    baseline_id: Optional[str] = None) -> List[Dict[str, Any]]:
    baseline = _baseline(measurements, baseline_id)
    baseline_tput = baseline.throughput
    rows = []
    for m in measurements:
        result = extra_tar(m, baseline_tput, m.t_target, gamma)
        rows.append({
            "model": m.model_id,
            "tar": m.tar,
            "needed_tar": result.needed,
            "extra_tar": result.extra,
            "feasible": result.feasible
        })
    return rows


def required_tar_curve(measurements: Sequence[DraftMeasurement], throughputs: Sequence[float],
                       gamma: int) -> List[Dict[str, Any]]:
    if not throughputs:
        raise EmptyInputError("required_tar_curve needs at least one target throughput")
    rows = []
    for m in measurements:
        for tput in throughputs:
            result = check_required_tar(tput, m.t_target, m.t_draft, gamma)
            rows.append({
                "model": m.model_id,
                "throughput": tput,
                "required_tar": result.required,
                "reachable": result.reachable
            })
    return rows


def write_what_if(rows: Sequence[Dict[str, Any]], path: str, fmt: str = "csv") -> Path:
    if fmt == "csv":
        return write_csv(list(rows), path)
    if fmt == "json":
        return write_json(list(rows), path)
    raise ValidationError(f"Unknown output format {fmt!r}")
