"""Output documents: schema tag, inputs echo, result, optional timestamp; JSON and CSV writers."""

import csv
import io
import json
import logging
from datetime import datetime
from pathlib import Path

from config_manager import ENABLE_TIMESTAMPS, SCHEMA_TAG

logger = logging.getLogger("measureit.report_utils")


def build_document(command, inputs, result, timestamp=None):
    """Wrap a command result into a versioned document."""
    document = {
        "schema": SCHEMA_TAG,
        "command": command,
        "inputs": inputs,
        "result": result,
    }
    stamp = ENABLE_TIMESTAMPS if timestamp is None else timestamp
    if stamp:
        document["timestamp"] = datetime.now().isoformat()
    return document


def error_document(command, inputs, kind, message, timestamp=None):
    document = build_document(command, inputs, None, timestamp)
    del document["result"]
    document["error"] = {"kind": kind, "message": message}
    return document


# ============================================================================
# SERIALIZATION
# ============================================================================

def to_json_text(document):
    """Byte-stable JSON: sorted keys, fixed indentation."""
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def flatten(data, prefix=""):
    """Nested dicts become dotted keys; lists are kept as compact JSON text."""
    row = {}
    if isinstance(data, dict):
        for key in sorted(data):
            row.update(flatten(data[key], f"{prefix}{key}."))
        return row
    key = prefix[:-1] if prefix else "value"
    row[key] = json.dumps(data, separators=(",", ":")) if isinstance(data, list) else data
    return row


def document_rows(document):
    """CSV rows of a document: one per sweep point, otherwise a single row."""
    result = document.get("result")
    if isinstance(result, dict) and "rows" in result:
        return [flatten(r) for r in result["rows"]]
    if result is None:
        return [flatten({"error": document.get("error")})]
    return [flatten(result)]


def to_csv_text(rows):
    columns = []
    for row in rows:
        columns.extend(c for c in row if c not in columns)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def render(document, fmt):
    if fmt == "csv":
        return to_csv_text(document_rows(document))
    return to_json_text(document)


def write_output(text, path=None):
    """Write to path, or return the text for stdout."""
    if path is None:
        return text
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            f.write(text)
        logger.info(f"Wrote output document to {path}")
    except OSError as e:
        logger.error(f"Error writing {path}: {e}")
        raise
    return None


def load_document(path):
    """Read back a JSON document written by write_output."""
    try:
        with open(path, "r") as f:
            return json.load(f)
    except Exception as e:
        logger.error(f"Error loading document {path}: {e}")
        return None


def write_iterates_csv(history, path):
    """Optimizer iterate log, one row per iteration."""
    rows = [{"iteration": it.iteration, "energy": it.energy, "gap": it.gap, "step": it.step} for it in history]
    write_output(to_csv_text(rows) if rows else "iteration,energy,gap,step\n", path)
    logger.debug(f"Recorded {len(rows)} optimizer iterates in {path}")
