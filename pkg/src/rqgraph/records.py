"""Result files: CSV or JSON-lines records behind a one-line metadata header.

CSV files start with ``# {json metadata}``, then a header row, then data.
Records files hold one JSON object per line; the first has
``"record": "meta"`` and the rest carry ``"record": <kind>``.  Floats are
written with ``repr`` so values survive a round trip bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import sys
from contextlib import contextmanager
from typing import Iterable, Sequence

FORMATS = ("csv", "records")


@contextmanager
def _open(path):
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _cell(value):
    if isinstance(value, bool):
        return int(value)
    return value


def render(fmt: str, meta: dict, kind: str, columns: Sequence[str],
           rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    elif fmt == "records":
        buf.write(json.dumps({"record": "meta", **meta}, sort_keys=True) + "\n")
        for row in rows:
            rec = {"record": kind}
            rec.update(zip(columns, (_cell(v) for v in row)))
            buf.write(json.dumps(rec) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def write(path, fmt: str, meta: dict, kind: str, columns: Sequence[str],
          rows: Iterable[Sequence]) -> None:
    text = render(fmt, meta, kind, columns, rows)
    with _open(path) as fh:
        fh.write(text)


def read_metadata(path) -> dict:
    """Metadata header of a file written by :func:`write`."""
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("# "):
        return json.loads(first[2:])
    meta = json.loads(first)
    meta.pop("record", None)
    return meta


def read_rows(path) -> tuple[list[str], list[dict]]:
    """Column names and rows (as dicts of strings or JSON values)."""
    with open(path) as fh:
        first = fh.readline()
        if first.startswith("# "):
            reader = csv.DictReader(fh)
            return list(reader.fieldnames or []), list(reader)
        rows = [json.loads(line) for line in fh if line.strip()]
    for r in rows:
        r.pop("record", None)
    return (list(rows[0]) if rows else []), rows
