"""CSV and JSON file formats."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Optional

import numpy as np

from .core import InteractionTensor, Partition, aggregate_stream, build_tensor

AGGREGATED_HEADER = ["src", "dst", "interval", "count"]
STREAM_HEADER = ["t", "src", "dst"]


class ParseError(ValueError):
    """Malformed input file; ``line`` is 1-based."""

    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _rows(path, header: list[str]):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            raise ParseError(path, 1, "empty file, expected header " + ",".join(header))
        if [f.strip() for f in first] != header:
            raise ParseError(path, 1, f"expected header {','.join(header)}, got {','.join(first)}")
        for row in reader:
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(header):
                raise ParseError(path, reader.line_num, f"expected {len(header)} fields, got {len(row)}")
            yield reader.line_num, [f.strip() for f in row]


def _int(path, line, field, text) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(path, line, f"{field} must be an integer, got {text!r}") from None


def read_aggregated_csv(path, n_nodes: Optional[int] = None, n_intervals: Optional[int] = None) -> InteractionTensor:
    """Read ``src,dst,interval,count`` rows; dimensions default to ``max index + 1``."""
    recs = []
    for line, row in _rows(path, AGGREGATED_HEADER):
        rec = tuple(_int(path, line, name, v) for name, v in zip(AGGREGATED_HEADER, row))
        i, j, u, c = rec
        if min(i, j, u) < 0:
            raise ParseError(path, line, "negative index")
        if c < 0:
            raise ParseError(path, line, "negative count")
        if i == j:
            raise ParseError(path, line, f"self-loop {i}->{j}")
        if n_nodes is not None and max(i, j) >= n_nodes:
            raise ParseError(path, line, f"node index {max(i, j)} >= N={n_nodes}")
        if n_intervals is not None and u >= n_intervals:
            raise ParseError(path, line, f"interval {u} >= U={n_intervals}")
        recs.append(rec)
    if n_nodes is None:
        n_nodes = max((max(r[0], r[1]) for r in recs), default=-1) + 1
    if n_intervals is None:
        n_intervals = max((r[2] for r in recs), default=-1) + 1
    if n_nodes < 1 or n_intervals < 1:
        raise ValueError(f"{path}: cannot infer dimensions from an empty file; pass them explicitly")
    return build_tensor(recs, n_nodes, n_intervals)


def read_stream_csv(path, delta: float, horizon: float, n_nodes: Optional[int] = None) -> InteractionTensor:
    """Read ``t,src,dst`` contact records and bin them into intervals of width ``delta``."""
    contacts = []
    for line, row in _rows(path, STREAM_HEADER):
        try:
            t = float(row[0])
        except ValueError:
            raise ParseError(path, line, f"t must be a number, got {row[0]!r}") from None
        i = _int(path, line, "src", row[1])
        j = _int(path, line, "dst", row[2])
        if not 0 < t <= horizon:
            raise ParseError(path, line, f"time {t} outside (0, {horizon}]")
        if i < 0 or j < 0:
            raise ParseError(path, line, "negative node id")
        if i == j:
            raise ParseError(path, line, f"self-loop {i}->{j}")
        contacts.append((t, i, j))
    return aggregate_stream(contacts, delta, horizon, n_nodes)


def write_aggregated_csv(tensor: InteractionTensor, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATED_HEADER)
        w.writerows(tensor.edges())


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def write_partition(partition: Partition, path, extra: Optional[dict] = None) -> None:
    d = partition.to_dict()
    if extra:
        d.update(extra)
    dump_json(d, path)


def read_partition(path) -> Partition:
    with open(path) as fh:
        d = json.load(fh)
    try:
        return Partition.from_dict(d)
    except KeyError as e:
        raise ValueError(f"{path}: missing key {e}") from None


def read_labels(path) -> tuple[np.ndarray, np.ndarray]:
    """Node and interval label vectors from a partition or ground-truth JSON."""
    with open(path) as fh:
        d = json.load(fh)
    return np.asarray(d["node_labels"]), np.asarray(d["interval_labels"])


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()
