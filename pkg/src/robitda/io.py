"""CSV ingestion and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .linalg import Dataset

_MISSING = {"", "na", "nan", "null", "none", "?"}


class CsvFormatError(ValueError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


class NonBinaryResponseError(ValueError):
    pass


class MissingValueError(ValueError):
    pass


def _parse_float(text: str, path, line: int, column: str) -> float:
    if text.strip().lower() in _MISSING:
        raise MissingValueError(f"{path}:{line}: missing value in column {column!r}")
    try:
        v = float(text)
    except ValueError:
        raise CsvFormatError(path, line, f"cannot parse {text!r} in column {column!r}") from None
    if not math.isfinite(v):
        raise MissingValueError(f"{path}:{line}: non-finite value {text!r} in column {column!r}")
    return v


def ingest_csv(path, intercept: bool = True, response: str = "y", columns=None) -> Dataset:
    """Read a header-row CSV of predictors and a 0/1 response into a :class:`Dataset`.

    Parameters
    ----------
    intercept
        Prepend a column of ones named ``intercept``.
    response
        Name of the response column.
    columns
        ``None`` for all predictor columns in file order, an integer ``K`` for
        the first ``K`` predictors, or a sequence of column names.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError(path, 1, "empty file")
    header = [h.strip() for h in rows[0]]
    if response not in header:
        raise CsvFormatError(path, 1, f"response column {response!r} not in header {header}")
    predictors = [h for h in header if h != response]
    if columns is None:
        chosen = predictors
    elif isinstance(columns, (int, np.integer)):
        if not 1 <= columns <= len(predictors):
            raise ValueError(f"columns={columns} but the file has {len(predictors)} predictors")
        chosen = predictors[: int(columns)]
    else:
        chosen = list(columns)
        unknown = [c for c in chosen if c not in predictors]
        if unknown:
            raise ValueError(f"unknown predictor columns {unknown}")
    idx = [header.index(c) for c in chosen]
    ridx = header.index(response)

    X, y = [], []
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise CsvFormatError(path, line, f"expected {len(header)} fields, got {len(row)}")
        yv = _parse_float(row[ridx], path, line, response)
        if yv not in (0.0, 1.0):
            raise NonBinaryResponseError(f"{path}:{line}: response value {row[ridx]!r} is not 0/1")
        X.append([_parse_float(row[j], path, line, header[j]) for j in idx])
        y.append(int(yv))
    if not y:
        raise CsvFormatError(path, len(rows), "no data rows")
    X = np.array(X, dtype=float).reshape(len(y), len(idx))
    names = tuple(chosen)
    if intercept:
        X = np.column_stack([np.ones(len(y)), X])
        names = ("intercept",) + names
    return Dataset(X, np.array(y), names)


def dataset_fingerprint(dataset: Dataset) -> dict:
    """``n``, ``p``, column names and a sha256 of little-endian X and y bytes."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(dataset.X, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(dataset.y, dtype="<i8").tobytes())
    return {"n": dataset.n, "p": dataset.p, "columns": list(dataset.columns), "sha256": h.hexdigest()}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass
class RunManifest:
    """Everything that determines a run's samples, plus non-hashed timestamps."""

    chains: list  # one resolved config dict per chain
    prior: dict
    dataset: dict
    options: dict
    version: str
    timestamps: dict = field(default_factory=dict)

    def hashed_content(self) -> dict:
        d = asdict(self)
        d.pop("timestamps")
        return d

    @property
    def hash(self) -> str:
        return hashlib.sha256(canonical_json(self.hashed_content()).encode()).hexdigest()

    def to_json(self) -> str:
        d = asdict(self)
        d["hash"] = self.hash
        return json.dumps(d, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        d = json.loads(text)
        stored = d.pop("hash", None)
        out = cls(**d)
        if stored is not None and stored != out.hash:
            raise ValueError("manifest hash does not match its content")
        return out
