"""Report files: CSV tables and the schema-checked summary.json."""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import jsonschema

from ..exceptions import RetSpecError

SUMMARY_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["experiment", "seed", "gated", "passed", "checks", "slopes", "tolerances", "files"],
    "properties": {
        "experiment": {"enum": ["spectrum", "trace", "nodal", "verify"]},
        "seed": {"type": "integer"},
        "gated": {"type": "boolean"},
        "passed": {"type": "boolean"},
        "n_max": {"type": "integer", "minimum": 1},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed"],
                "properties": {
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "enforced": {"type": "boolean"},
                    "value": {"type": ["number", "null"]},
                    "threshold": {"type": ["number", "null"]},
                    "note": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
        "slopes": {
            "type": "object",
            "additionalProperties": {"type": ["number", "null"]},
        },
        "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
        "files": {"type": "array", "items": {"type": "string"}},
        "trace": {"type": "object"},
        "nodal": {"type": "object"},
        "near_zero_roots": {"type": "array", "items": {"type": "number"}},
    },
}


def format_number(value: Optional[float]) -> str:
    """17 significant digits; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([value if isinstance(value, str) else format_number(value) for value in row])
    return path


def json_safe(value: Any) -> Any:
    """Replace non-finite floats with None, recursively."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    return value


def write_summary(path: Path, summary: Dict[str, Any]) -> Path:
    """Validate against SUMMARY_SCHEMA and write sorted, indented JSON."""
    summary = json_safe(summary)
    try:
        jsonschema.validate(summary, SUMMARY_SCHEMA)
    except jsonschema.ValidationError as e:
        raise RetSpecError(f"summary does not match its schema: {e.message}") from e
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def check(
    name: str,
    passed: bool,
    value: Optional[float] = None,
    threshold: Optional[float] = None,
    note: str = "",
) -> Dict[str, Any]:
    entry: Dict[str, Any] = {"name": name, "passed": bool(passed), "value": value, "threshold": threshold}
    if note:
        entry["note"] = note
    return entry


def file_names(paths: List[Path]) -> List[str]:
    return sorted(path.name for path in paths)
