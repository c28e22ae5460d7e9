"""Versioned JSON records: every output file carries the schema number, the
package version and the configuration that produced it."""

from __future__ import annotations

import json
import math
from typing import Any

from . import __version__
from .conditions import ConditionVerdict, LifespanBounds
from .predictor import parse_law
from .sweep import SweepResult
from .volterra import BlowupEstimate

SCHEMA = 1

KINDS = ("prediction", "verdicts", "bounds", "blowup", "sweep")


def _encode(obj) -> Any:
    if obj is None:
        return None
    kind, value = obj
    if kind == "prediction":
        return {"law": value.spec()}
    if kind == "verdicts":
        return {name: v.to_dict() for name, v in value.items()}
    return value.to_dict()


def _decode(kind: str, payload: dict):
    if kind == "prediction":
        return parse_law(payload["law"])
    if kind == "verdicts":
        return {name: ConditionVerdict.from_dict(v) for name, v in payload.items()}
    if kind == "bounds":
        return LifespanBounds.from_dict(payload)
    if kind == "blowup":
        return BlowupEstimate.from_dict(payload)
    if kind == "sweep":
        return SweepResult.from_dict(payload)
    raise ValueError(f"unknown record kind {kind!r}")


def dumps(kind: str, value, config: dict, extra: dict | None = None) -> str:
    if kind not in KINDS:
        raise ValueError(f"unknown record kind {kind!r}")
    record = {
        "schema": SCHEMA,
        "version": __version__,
        "kind": kind,
        "config": config,
        "result": _encode((kind, value)),
    }
    if extra:
        record["extra"] = extra
    return json.dumps(record, indent=2, allow_nan=False, default=_fallback)


def loads(text: str) -> tuple:
    """Parse a record; returns (kind, value, config)."""
    record = json.loads(text)
    if record.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {record.get('schema')!r}")
    kind = record["kind"]
    return kind, _decode(kind, record["result"]), record["config"]


def _fallback(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf"
    return str(obj)


def csv_preamble(config: dict) -> str:
    """Comment lines placed above the CSV header."""
    return f"# lifespan-lab {__version__} schema={SCHEMA}\n# config={json.dumps(config, sort_keys=True)}\n"
