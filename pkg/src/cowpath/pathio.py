"""Reading and writing path files (JSON document or CSV point list)."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from .geometry import DomainError, Polyline


class PathFormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def parse_json(text: str) -> Polyline:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise PathFormatError(e.msg, e.lineno) from None
    if not isinstance(doc, dict) or "vertices" not in doc or "dimension" not in doc:
        raise PathFormatError('expected an object with "dimension" and "vertices"', 1)
    d = doc["dimension"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise PathFormatError(f"dimension must be a positive integer, got {d!r}", 1)
    rows = doc["vertices"]
    if not isinstance(rows, list) or not rows:
        raise PathFormatError("vertices must be a non-empty list", 1)
    lines = _vertex_lines(text, len(rows))
    for i, row in enumerate(rows):
        ok = isinstance(row, list) and len(row) == d
        ok = ok and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in row)
        if not ok:
            raise PathFormatError(f"vertex {i} must be a list of {d} numbers, got {row!r}", lines[i])
    return _build(np.array(rows, dtype=float), lines[0])


def _vertex_lines(text: str, n: int) -> list[int | None]:
    """Best-effort source line for each vertex row of a JSON document."""
    start = text.find('"vertices"')
    if start < 0:
        return [None] * n
    out, depth, line = [], 0, text.count("\n", 0, start) + 1
    for ch in text[start:]:
        if ch == "\n":
            line += 1
        elif ch == "[":
            depth += 1
            if depth == 2:
                out.append(line)
        elif ch == "]":
            depth -= 1
            if depth == 0:
                break
    return (out + [None] * n)[:n]


def parse_csv(text: str) -> Polyline:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise PathFormatError("empty CSV file", 1) from None
    d = len(header)
    expected = [f"x{i + 1}" for i in range(d)]
    if [h.strip() for h in header] != expected:
        raise PathFormatError(f"header must be {','.join(expected)}", 1)
    rows = []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d:
            raise PathFormatError(f"expected {d} columns, got {len(row)}", reader.line_num)
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            raise PathFormatError(f"non-numeric value in {row!r}", reader.line_num) from None
    if not rows:
        raise PathFormatError("no vertices", 2)
    return _build(np.array(rows), 2)


def _build(v: np.ndarray, line) -> Polyline:
    try:
        return Polyline(v)
    except DomainError as e:
        raise PathFormatError(str(e), line) from None


def load_path(file) -> tuple[Polyline, str]:
    """Load a path file; returns the polyline and a digest of the raw bytes."""
    p = Path(file)
    data = p.read_bytes()
    text = data.decode("utf-8")
    path = parse_csv(text) if p.suffix.lower() == ".csv" else parse_json(text)
    return path, digest(data)


def dumps_json(path: Polyline) -> str:
    return json.dumps({"dimension": path.dimension, "vertices": path.vertices.tolist()})


def dumps_csv(path: Polyline) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(path.dimension)])
    for row in path.vertices:
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def save_path(path: Polyline, file) -> None:
    p = Path(file)
    p.write_text(dumps_csv(path) if p.suffix.lower() == ".csv" else dumps_json(path))
