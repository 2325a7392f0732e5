"""Reading operands from disk and writing result tables."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..errors import ValidationError

#: bump when result columns change meaning or order
RESULT_FORMAT_VERSION = "qkmm-results/1"


def load_matrix(path) -> np.ndarray:
    """Real matrix (or vector) from CSV or a JSON array of arrays."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            data = np.asarray(json.loads(path.read_text()), dtype=float)
        else:
            with path.open(newline="") as fh:
                rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
            data = np.asarray([[float(x) for x in r] for r in rows], dtype=float)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read matrix from {path}: {exc}") from exc
    if data.ndim == 2 and 1 in data.shape and data.shape[0] != data.shape[1]:
        data = data.ravel()
    if data.ndim not in (1, 2) or data.size == 0:
        raise ValidationError(f"{path} does not hold a vector or matrix")
    if not np.all(np.isfinite(data)):
        raise ValidationError(f"{path} contains non-finite values")
    return data


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, columns: list[str], rows: list[dict], kind: str) -> Path:
    """CSV with a versioned header comment naming the command and columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# {RESULT_FORMAT_VERSION} {kind} columns={','.join(columns)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row.get(c, "")) for c in columns])
    return path


def read_csv(path) -> tuple[str, list[dict]]:
    """Inverse of :func:`write_csv`; returns (header comment, rows as strings)."""
    with Path(path).open(newline="") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith("# qkmm-results/"):
            raise ValidationError(f"{path} is not a results file")
        return header, list(csv.DictReader(fh))


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")
