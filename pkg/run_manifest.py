#!/usr/bin/env python3
"""
Run manifests and output writers for permspec.

Data goes to a file or stdout; the manifest describing the run goes next to
the file as `<output>.manifest.json`, or to stderr when the data is on
stdout. Nothing run-specific (wall time, host) is written into the data.
"""

import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional

import mpmath
import numpy as np
import pandas as pd

from settings import SCHEMA_VERSION, VERSION

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def to_jsonable(value: Any) -> Any:
    """Convert Fractions, numpy scalars and mpmath numbers to JSON-safe values."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, 20)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


@dataclass
class RunManifest:
    command: str
    params: Dict[str, Any]
    seed: Optional[int] = None
    bits: Optional[int] = None
    truncation: Dict[str, Any] = field(default_factory=dict)
    version: str = VERSION
    schema_version: int = SCHEMA_VERSION
    wall_time: float = 0.0
    _started: float = field(default_factory=time.perf_counter, repr=False)

    def finish(self):
        self.wall_time = round(time.perf_counter() - self._started, 6)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("_started")
        return data

    def write(self, output: Optional[str]):
        """Write next to `output`, or to stderr when output is stdout."""
        self.finish()
        text = dumps(self.to_dict())
        if output in (None, "-"):
            sys.stderr.write(text)
            return None
        path = f"{output}.manifest.json"
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"Manifest written to {path}")
        return path


def write_csv(df: pd.DataFrame, output: Optional[str]):
    """CSV without index, floats with 17 significant digits."""
    if output in (None, "-"):
        df.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return
    df.to_csv(output, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"{len(df)} rows written to {output}")


def write_json(payload: Any, output: Optional[str]):
    text = dumps(payload)
    if output in (None, "-"):
        sys.stdout.write(text)
        return
    with open(output, "w", encoding="utf-8") as f:
        f.write(text)
    logger.info(f"JSON written to {output}")


def write_json_lines(records, output: Optional[str]):
    """One compact JSON object per line."""
    lines = "".join(json.dumps(to_jsonable(r), sort_keys=True) + "\n" for r in records)
    if output in (None, "-"):
        sys.stdout.write(lines)
        return
    with open(output, "w", encoding="utf-8") as f:
        f.write(lines)
