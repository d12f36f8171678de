"""File Output - SpecDec Lab

Complete-or-absent CSV and JSON writers (temp file in the same directory,
then os.replace).
"""

import os
import csv
import json
import logging
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)


def _atomic_write(path: Path, write) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            write(handle)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    return path


def write_csv(rows: Sequence[Dict[str, Any]], path: str, columns: Optional[List[str]] = None) -> Path:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []

    def write(handle):
        writer = csv.DictWriter(handle, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})

    target = _atomic_write(Path(path), write)
    logger.info(f"Wrote {len(rows)} rows to {target}")
    return target


def write_json(payload: Any, path: str) -> Path:
    target = _atomic_write(Path(path), lambda handle: json.dump(payload, handle, indent=2, sort_keys=True, default=str))
    logger.info(f"Wrote {target}")
    return target


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))
