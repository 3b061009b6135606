"""Sample files, bounds files and result documents.

Sample files are delimited text. The first row holds parameter names,
optionally preceded by a ``chain`` column; without it all rows form one
chain. Bounds files are JSON objects mapping each parameter name to
``{"lb": number | "-inf", "ub": number | "inf"}``; a missing side is
unbounded. Result documents are JSON written with sorted keys, where
floats use the shortest decimal string that round-trips exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InputError
from .estimator import BridgeResult
from .paramspace import ParameterBound, ParameterSpec
from .proposal import SampleSet

FORMAT_VERSION = 1
CHAIN_COLUMN = "chain"


class ParseError(InputError):
    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.path = path
        self.line = line


def read_samples(path: str | Path, expected_names=None) -> SampleSet:
    """Parse a delimited sample file.

    If ``expected_names`` is given, every header column must be one of them
    and all of them must be present; columns are reordered to match.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc), path) from exc
    lines = text.splitlines()
    if not lines:
        raise ParseError("file is empty", path, 1)
    try:
        dialect = csv.Sniffer().sniff(lines[0], delimiters=",\t; ")
        delimiter = dialect.delimiter
    except csv.Error:
        delimiter = ","
    reader = csv.reader(lines, delimiter=delimiter, skipinitialspace=True)
    header = [h.strip() for h in next(reader)]
    has_chain = bool(header) and header[0].lower() == CHAIN_COLUMN
    names = header[1:] if has_chain else header
    if not names or any(not n for n in names):
        raise ParseError("header must name every parameter column", path, 1)
    if len(set(names)) != len(names):
        raise ParseError(f"duplicate column names in header: {names}", path, 1)
    if expected_names is not None:
        for n in names:
            if n not in expected_names:
                raise ParseError(
                    f"unknown parameter column {n!r}; expected {list(expected_names)}", path, 1
                )
        missing = [n for n in expected_names if n not in names]
        if missing:
            raise ParseError(f"missing parameter column(s) {missing}", path, 1)

    rows, chains = [], []
    for lineno, fields in enumerate(reader, start=2):
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(fields)}", path, lineno)
        if has_chain:
            chains.append(fields[0].strip())
            fields = fields[1:]
        values = []
        for name, f in zip(names, fields):
            try:
                values.append(float(f))
            except ValueError:
                raise ParseError(f"cannot parse {f!r} in column {name!r}", path, lineno) from None
        rows.append(values)
    if not rows:
        raise ParseError("no sample rows", path, 2)
    values = np.array(rows)
    chain_id = np.array(chains) if has_chain else np.zeros(len(rows), dtype=int)
    if expected_names is not None:
        order = [names.index(n) for n in expected_names]
        values, names = values[:, order], list(expected_names)
    return SampleSet(values, chain_id, tuple(names))


def write_samples(samples: SampleSet, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([CHAIN_COLUMN, *samples.names])
        for c, row in zip(samples.chain_id, samples.values):
            w.writerow([c, *(repr(float(v)) for v in row)])


def _limit(value, side: str, name: str, path) -> float:
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("-inf", "-infinity") and side == "lb":
            return -math.inf
        if v in ("inf", "+inf", "infinity") and side == "ub":
            return math.inf
        raise ParseError(f"bad {side} {value!r} for parameter {name!r}", path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"bad {side} {value!r} for parameter {name!r}", path)
    return float(value)


def read_bounds(path: str | Path, names) -> ParameterSpec:
    """Build a ParameterSpec for ``names`` from a JSON bounds table."""
    try:
        table = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(str(exc), path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from exc
    if not isinstance(table, dict):
        raise ParseError("bounds file must hold a JSON object", path)
    unknown = [k for k in table if k not in names]
    if unknown:
        raise ParseError(f"bounds given for unknown parameter(s) {unknown}", path)
    bounds = []
    for n in names:
        entry = table.get(n, {})
        if not isinstance(entry, dict) or set(entry) - {"lb", "ub"}:
            raise ParseError(f"entry for {n!r} must be an object with keys lb/ub", path)
        lb = _limit(entry.get("lb", "-inf"), "lb", n, path)
        ub = _limit(entry.get("ub", "inf"), "ub", n, path)
        try:
            bounds.append(ParameterBound.from_limits(lb, ub))
        except InputError as exc:
            raise ParseError(f"{n!r}: {exc}", path) from exc
    return ParameterSpec(tuple(names), tuple(bounds))


def bounds_table(spec: ParameterSpec) -> dict[str, dict[str, Any]]:
    out = {}
    for n, b in zip(spec.names, spec.bounds):
        lb, ub = b.limits
        out[n] = {"lb": "-inf" if lb == -math.inf else lb, "ub": "inf" if ub == math.inf else ub}
    return out


_RESULT_FIELDS = ("method", "n1", "n2", "s1", "s2", "seed", "tol", "max_iter", "tail_clamps")


def result_to_dict(result: BridgeResult) -> dict[str, Any]:
    doc = {k: getattr(result, k) for k in _RESULT_FIELDS}
    doc["format_version"] = FORMAT_VERSION
    doc["repetitions"] = result.repetitions
    doc["log_ml"] = [float(v) for v in result.log_ml]
    doc["iterations"] = [int(v) for v in result.iterations]
    doc["converged"] = [bool(v) for v in result.converged]
    doc["s_rule"] = "s1 = n1/(n1+n2), s2 = n2/(n1+n2)"
    return doc


def result_from_dict(doc: dict[str, Any], path=None) -> BridgeResult:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {doc.get('format_version')!r}", path)
    try:
        log_ml = np.array(doc["log_ml"], dtype=np.float64).reshape(-1)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("result needs a numeric 'log_ml' list", path) from exc
    if log_ml.size == 0:
        raise ParseError("'log_ml' is empty", path)
    reps = log_ml.size
    try:
        return BridgeResult(
            log_ml=log_ml,
            iterations=np.array(doc.get("iterations", [0] * reps), dtype=int),
            converged=np.array(doc.get("converged", [True] * reps), dtype=bool),
            method=str(doc.get("method", "normal")),
            n1=int(doc.get("n1", 0)),
            n2=int(doc.get("n2", 0)),
            s1=float(doc.get("s1", 0.5)),
            s2=float(doc.get("s2", 0.5)),
            seed=int(doc.get("seed", 0)),
            tol=float(doc.get("tol", 1e-10)),
            max_iter=int(doc.get("max_iter", 1000)),
            tail_clamps=int(doc.get("tail_clamps", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed result field: {exc}", path) from exc


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_document(doc: dict[str, Any], path: str | Path) -> None:
    Path(path).write_text(dumps(doc))


def read_document(path: str | Path) -> dict[str, Any]:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(str(exc), path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("result document must be a JSON object", path)
    return doc


def read_result(path: str | Path) -> BridgeResult:
    return result_from_dict(read_document(path), path)
