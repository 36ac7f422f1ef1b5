"""
Shared output and logging helpers.

Artifacts go to an output directory (``outputs/`` next to the package unless a
job overrides it). Every write is atomic: the content lands in a temp file in
the target directory and is moved into place with ``os.replace``.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from typing import Any

import numpy as np
import pandas as pd
from dotenv import load_dotenv

OUTPUTS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(__file__))), "outputs")

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

_output_dir = OUTPUTS_DIR


def set_output_dir(path: str) -> str:
    """Redirect artifacts for the rest of the process."""
    global _output_dir
    _output_dir = os.path.abspath(path)
    return _output_dir


def get_output_path(filename: str) -> str:
    """Return an absolute path inside the current output directory."""
    os.makedirs(_output_dir, exist_ok=True)
    return os.path.join(_output_dir, filename)


def _write_atomic(path: str, text: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path


def to_jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else None
    return obj


def write_json_atomic(filename: str, payload: dict) -> str:
    """Write ``payload`` as sorted, indented JSON into the output directory."""
    text = json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"
    return _write_atomic(get_output_path(filename), text)


def write_csv_atomic(filename: str, df: pd.DataFrame) -> str:
    """Write a DataFrame as CSV into the output directory."""
    return _write_atomic(get_output_path(filename), df.to_csv(index=False, float_format="%.17g"))


def write_text_atomic(filename: str, text: str) -> str:
    return _write_atomic(get_output_path(filename), text)


def configure_logging(level: str | None = None) -> int:
    """Set the root log level from ``level`` or EKTAU_LOG (a .env file is honoured)."""
    load_dotenv()
    name = (level or os.environ.get("EKTAU_LOG", "info")).strip().lower()
    if name not in LOG_LEVELS:
        raise ValueError(f"EKTAU_LOG must be one of {sorted(LOG_LEVELS)}, got '{name}'")
    logging.basicConfig(
        level=LOG_LEVELS[name],
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
    return LOG_LEVELS[name]


def write_artifacts(command: str, summary: dict, table: pd.DataFrame | None = None,
                    extra_tables: dict[str, pd.DataFrame] | None = None) -> list[str]:
    """``<command>.json`` (with the CSV column manifest) and ``<command>.csv``.

    Each entry of ``extra_tables`` becomes ``<command>-<name>.csv``, listed under
    ``tables`` in the JSON with its own columns.
    """
    payload = dict(summary)
    paths = []
    if table is not None:
        payload["columns"] = [str(c) for c in table.columns]
        payload["csv"] = f"{command}.csv"
        paths.append(write_csv_atomic(f"{command}.csv", table))
    if extra_tables:
        payload["tables"] = {}
        for name, df in extra_tables.items():
            filename = f"{command}-{name}.csv"
            payload["tables"][name] = {"csv": filename, "columns": [str(c) for c in df.columns]}
            paths.append(write_csv_atomic(filename, df))
    paths.insert(0, write_json_atomic(f"{command}.json", payload))
    return paths
