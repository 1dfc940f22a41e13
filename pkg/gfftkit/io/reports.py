"""CSV writers.

Floats are written with ``repr`` so identical runs give identical bytes.
"""

import csv
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from ..core.gbm import PathSample
from ..harness.verify import VerifyReport

VERIFY_COLUMNS = (
    "theorem_id",
    "n",
    "closed_re",
    "closed_im",
    "est_re",
    "est_im",
    "stderr",
    "discrepancy",
    "threshold",
    "pass",
)


def _num(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def verify_rows(reports: Iterable[VerifyReport]) -> list[list[str]]:
    return [
        [
            r.theorem_id,
            "" if r.n is None else str(r.n),
            _num(r.closed_form.real),
            _num(r.closed_form.imag),
            _num(r.estimate.real),
            _num(r.estimate.imag),
            _num(r.stderr),
            _num(r.discrepancy),
            _num(r.threshold),
            "true" if r.passed else "false",
        ]
        for r in reports
    ]


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_verify_csv(reports: Sequence[VerifyReport], path: Path) -> None:
    _write(path, VERIFY_COLUMNS, verify_rows(reports))


def write_paths_csv(paths: Sequence[PathSample], path: Path) -> None:
    """Long format: one row per (path, node)."""
    rows = (
        [str(i), _num(t), _num(x)]
        for i, sample in enumerate(paths)
        for t, x in zip(sample.cfg.nodes, sample.values)
    )
    _write(path, ("path_id", "t", "x"), rows)


def write_values_csv(
    records: Sequence[dict[str, object]], path: Path, columns: Sequence[str]
) -> None:
    """Generic table of named values; complex numbers split into re/im."""
    header: list[str] = []
    for column in columns:
        sample = records[0].get(column) if records else None
        if isinstance(sample, complex):
            header.extend([f"{column}_re", f"{column}_im"])
        else:
            header.append(column)

    def cells(record: dict[str, object]) -> list[str]:
        out = []
        for column in columns:
            value = record.get(column)
            if isinstance(value, complex):
                out.extend([_num(value.real), _num(value.imag)])
            elif isinstance(value, (float, np.floating)):
                out.append(_num(value))
            else:
                out.append("" if value is None else str(value))
        return out

    _write(path, header, (cells(r) for r in records))
