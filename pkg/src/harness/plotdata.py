"""
Plot Data - SpecDec Lab

Versioned CSV schemas for each figure kind. Files are plain CSV with a
sidecar <name>.schema.json naming kind, version and columns.
"""

import re
import logging
from pathlib import Path
from typing import Dict, List, Any, Sequence

from src.errors import SchemaMismatchError
from src.fileio import write_csv, write_json

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

SCHEMAS: Dict[str, List[str]] = {
    "breakdown": ["model", "phase", "fraction"],
    "latency_depth": ["layers", "ms"],
    "latency_width": ["model_dim", "ms"],
    "tput_vs_tar": ["model", "tar", "throughput"],
    "parity": ["model", "latency", "parity_latency", "reduction_pct"],
    "extra_tar": ["model", "needed_tar", "extra_tar", "feasible"],
    "required_tar": ["model", "throughput", "required_tar", "reachable"],
}

SORT_KEYS = {"latency_depth": "layers", "latency_width": "model_dim"}


def _check(records: Sequence[Dict[str, Any]], kind: str) -> List[str]:
    if kind not in SCHEMAS:
        raise SchemaMismatchError(f"Unknown plot-data kind {kind!r}; expected one of {sorted(SCHEMAS)}")
    columns = SCHEMAS[kind]
    for index, record in enumerate(records):
        missing = [c for c in columns if c not in record]
        if missing:
            raise SchemaMismatchError(f"{kind} record {index} is missing {missing}")
    return columns


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", str(name)).strip("_") or "model"


def emit_plotdata(records: Sequence[Dict[str, Any]], kind: str, out_dir: str) -> List[Path]:
    columns = _check(records, kind)
    out = Path(out_dir)
    written: List[Path] = []

    if kind == "breakdown":
        # One (phase, fraction) file per model.
        by_model: Dict[str, List[Dict[str, Any]]] = {}
        for record in records:
            by_model.setdefault(str(record["model"]), []).append(record)
        for model, rows in by_model.items():
            written.append(write_csv(rows, str(out / f"breakdown_{_slug(model)}.csv"), ["phase", "fraction"]))
    else:
        rows = list(records)
        if kind in SORT_KEYS:
            rows.sort(key=lambda r: r[SORT_KEYS[kind]])
        written.append(write_csv(rows, str(out / f"{kind}.csv"), columns))

    write_json({"kind": kind, "schema_version": SCHEMA_VERSION, "columns": columns},
               str(out / f"{kind}.schema.json"))
    logger.info(f"Emitted {kind} plot data: {[p.name for p in written]}")
    return written
