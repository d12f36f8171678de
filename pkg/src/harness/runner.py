"""
Experiment Runner - SpecDec Lab

Dispatches an ExperimentSpec to its pipeline, serializes timed kinds behind
one lock, writes <experiment_id>.json (and .csv) atomically and removes every
file of a failed run.
"""

import logging
import threading
from contextlib import nullcontext
from pathlib import Path
from typing import List, Optional

from src.errors import ValidationError, ExperimentFailure
from src.fileio import write_csv, write_json
from .experiment import ExperimentSpec, ResultRecord
from .pipelines import PIPELINES, RunContext

logger = logging.getLogger(__name__)

TIMING_LOCK = threading.Lock()


def _cleanup(paths: List[Path]) -> None:
    for path in paths:
        try:
            if path.exists():
                path.unlink()
        except OSError as e:
            logger.error(f"Could not remove partial output {path}: {e}")


def run_experiment(spec: ExperimentSpec, repository=None) -> List[ResultRecord]:
    """Run one experiment; outputs are complete or absent."""
    if spec.dataset and not Path(spec.dataset).exists():
        raise ValidationError(f"Dataset not found: {spec.dataset}")

    ctx = RunContext(spec=spec)
    logger.info(f"Starting {spec.kind.value} experiment {spec.experiment_id} (config {spec.config_hash[:10]})")
    try:
        with TIMING_LOCK if spec.is_timed else nullcontext():
            outcome = PIPELINES[spec.kind](ctx)
        records = [
            ResultRecord(experiment_id=spec.experiment_id, kind=spec.kind.value, metrics=rows,
                         config_hash=spec.config_hash, seed=spec.seed, summary=summary)
            for rows, summary in outcome
        ]
        out = Path(spec.out_dir)
        ctx.track(write_json({"spec": spec.to_dict(), "records": [r.to_dict() for r in records]},
                             str(out / f"{spec.experiment_id}.json")))
        if spec.format == "csv":
            rows = [row for record in records for row in record.metrics]
            ctx.track(write_csv(rows, str(out / f"{spec.experiment_id}.csv"), _columns(rows)))
    except ValidationError:
        _cleanup(ctx.written)
        raise
    except Exception as e:
        _cleanup(ctx.written)
        logger.error(f"Experiment {spec.experiment_id} failed: {e}")
        raise ExperimentFailure(f"{spec.kind.value} experiment {spec.experiment_id} failed: {e}") from e

    if repository is not None:
        for record in records:
            repository.save_record(record)
    logger.info(f"Finished {spec.experiment_id}: {len(records)} record(s)")
    return records


def _columns(rows: List[dict]) -> List[str]:
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns
