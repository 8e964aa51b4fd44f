"""Table writers with all-or-nothing semantics.

Tables are staged in memory.  ``commit`` writes each one to a temporary file
in the target directory and renames them into place only after every file
has been written, so a failed run leaves nothing behind.
"""
from __future__ import annotations

import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def format_number(value) -> str:
    """17 significant digits for floats; integers and strings pass through."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def format_time(t: float) -> str:
    """Short, filesystem-friendly rendering of a time for file names."""
    return format(float(t), ".12g")


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)

    @classmethod
    def from_columns(cls, **cols) -> "Table":
        names = tuple(cols)
        arrays = [np.asarray(v).ravel() for v in cols.values()]
        n = {a.size for a in arrays}
        if len(n) > 1:
            raise ValueError("columns differ in length")
        return cls(names, [tuple(r) for r in zip(*arrays)])

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            buf = io.StringIO()
            buf.write(",".join(self.columns) + "\n")
            for row in self.rows:
                buf.write(",".join(format_number(v) for v in row) + "\n")
            return buf.getvalue()
        if fmt == "json":
            records = [{c: _json_value(v) for c, v in zip(self.columns, row)} for row in self.rows]
            return json.dumps({"columns": list(self.columns), "rows": records}, indent=1) + "\n"
        raise ValueError(f"unknown format {fmt!r}")


class OutputSet:
    """Named tables waiting to be written to ``directory``."""

    def __init__(self, directory, fmt: str = "csv"):
        self.directory = Path(directory)
        self.format = fmt
        self._tables: dict[str, Table] = {}

    def add(self, stem: str, table: Table) -> None:
        if stem in self._tables:
            raise ValueError(f"duplicate output {stem!r}")
        self._tables[stem] = table

    def add_report(self, stem: str, report: dict) -> None:
        self.add(stem, Table(("key", "value"), [(k, v) for k, v in report.items()]))

    @property
    def names(self) -> list[str]:
        return [f"{stem}.{self.format}" for stem in self._tables]

    def commit(self) -> list[Path]:
        self.directory.mkdir(parents=True, exist_ok=True)
        staged = []
        try:
            for stem, table in self._tables.items():
                fd, tmp = tempfile.mkstemp(prefix=f".{stem}.", suffix=".tmp", dir=self.directory)
                staged.append((Path(tmp), self.directory / f"{stem}.{self.format}"))
                with os.fdopen(fd, "w", newline="") as fh:
                    fh.write(table.render(self.format))
        except BaseException:
            for tmp, _ in staged:
                tmp.unlink(missing_ok=True)
            raise
        for tmp, final in staged:
            os.replace(tmp, final)
        return [final for _, final in staged]
