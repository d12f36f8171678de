"""
Experiment Types - SpecDec Lab

ExperimentSpec (what to run), ResultRecord (what came out) and the
environment fingerprint attached to every record.
"""

import os
import json
import hashlib
import logging
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Any

import numpy as np

from src.errors import ConfigError

logger = logging.getLogger(__name__)

BUILD_ID = "0.1.0"


class ExperimentKind(Enum):
    BENCH_LATENCY = "bench-latency"
    RUN_SPECDEC = "run-specdec"
    SWEEP_LOOKAHEAD = "sweep-lookahead"
    PREDICT = "predict"
    PARITY = "parity"
    EXTRA_TAR = "extra-tar"
    REQUIRED_TAR = "required-tar"
    EXPLORE = "explore"
    COMPARE = "compare"
    INGEST = "ingest"


# Kinds whose metrics depend on wall-clock time; they run under the timing lock.
TIMED_KINDS = {
    ExperimentKind.BENCH_LATENCY,
    ExperimentKind.RUN_SPECDEC,
    ExperimentKind.SWEEP_LOOKAHEAD,
    ExperimentKind.COMPARE,
}

OUTPUT_FORMATS = ("csv", "json")


@dataclass
class ExperimentSpec:
    kind: ExperimentKind
    params: Dict[str, Any] = field(default_factory=dict)
    experiment_id: Optional[str] = None
    dataset: Optional[str] = None
    out_dir: str = "results"
    repetitions: int = 1
    warmup: int = 3
    seed: int = 0
    format: str = "csv"

    def __post_init__(self):
        if isinstance(self.kind, str):
            try:
                self.kind = ExperimentKind(self.kind)
            except ValueError:
                raise ConfigError(f"Unknown experiment kind {self.kind!r}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.warmup < 0:
            raise ConfigError("warmup must be >= 0")
        if self.format not in OUTPUT_FORMATS:
            raise ConfigError(f"format must be one of {OUTPUT_FORMATS}, got {self.format!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.params, dict):
            raise ConfigError("params must be a JSON object")
        if not self.experiment_id:
            self.experiment_id = f"{self.kind.value}-{self.config_hash[:10]}"

    @property
    def is_timed(self) -> bool:
        return self.kind in TIMED_KINDS

    def hashed_fields(self) -> Dict[str, Any]:
        """Everything that determines the result; ids and output locations are excluded."""
        return {
            "kind": self.kind.value,
            "params": self.params,
            "dataset": self.dataset,
            "repetitions": self.repetitions,
            "warmup": self.warmup,
            "seed": self.seed
        }

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.hashed_fields(), sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.hashed_fields(), experiment_id=self.experiment_id, out_dir=self.out_dir,
                    format=self.format)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentSpec":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"Unknown ExperimentSpec fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentSpec":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"Experiment spec not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}") from e
        return cls.from_dict(data)


def environment_fingerprint() -> Dict[str, str]:
    return {
        "host": platform.node(),
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "build_id": os.getenv("SPECDEC_BUILD_ID", BUILD_ID)
    }


@dataclass
class ResultRecord:
    experiment_id: str
    kind: str
    metrics: List[Dict[str, Any]]
    config_hash: str
    seed: int
    summary: Dict[str, Any] = field(default_factory=dict)
    environment: Dict[str, str] = field(default_factory=environment_fingerprint)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment_id": self.experiment_id,
            "kind": self.kind,
            "metrics": self.metrics,
            "summary": self.summary,
            "environment": self.environment,
            "config_hash": self.config_hash,
            "seed": self.seed
        }
