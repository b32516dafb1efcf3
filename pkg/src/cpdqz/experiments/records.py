"""Per-trial records and their CSV summaries.

``raw.csv`` and ``summary.csv`` hold only seed-determined quantities, so two
runs with the same configuration produce identical bytes. Wall times live in
``timing.csv`` (per trial) and ``timing_summary.csv`` (medians).
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import CpdError, IoError


@dataclass
class ExperimentRecord:
    """One (method, sweep point, trial) outcome.

    ``params`` echoes the sweep coordinates (rank, SNR, ...). ``metrics``
    holds the error quantities; NaN marks a failed trial, whose failure tag
    is in ``status``.
    """

    method: str
    params: dict
    trial: int
    metrics: dict
    wall_time: float = 0.0
    status: str = "ok"
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.wall_time < 0:
            raise ValueError("wall time must be non-negative")
        for k, v in self.metrics.items():
            if v < 0:
                raise ValueError(f"metric {k} must be non-negative, got {v}")


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _median(values: Sequence[float]) -> float:
    # failures rank as the worst outcome
    vals = np.array([math.inf if math.isnan(v) else v for v in values], dtype=float)
    return float(np.median(vals))


def _check_uniform(records: Sequence[ExperimentRecord]) -> tuple[list[str], list[str]]:
    if not records:
        raise ValueError("emit_summary needs at least one record")
    pkeys = list(records[0].params)
    mkeys = list(records[0].metrics)
    for r in records:
        if list(r.params) != pkeys or list(r.metrics) != mkeys:
            raise ValueError("all records must share parameter and metric names")
    return pkeys, mkeys


def group_records(records: Sequence[ExperimentRecord]) -> dict[tuple, list[ExperimentRecord]]:
    """Records grouped by ``(method, *params)`` in order of first appearance."""
    groups: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        groups.setdefault((r.method, *r.params.values()), []).append(r)
    return groups


def summarize(records: Sequence[ExperimentRecord]) -> list[dict]:
    """Median of every metric and of wall time per method and sweep point."""
    pkeys, mkeys = _check_uniform(records)
    rows = []
    for key, grp in group_records(records).items():
        row = {"method": key[0], **dict(zip(pkeys, key[1:]))}
        row["n_trials"] = len(grp)
        row["n_failed"] = sum(r.status != "ok" for r in grp)
        for k in mkeys:
            row[f"median_{k}"] = _median([r.metrics[k] for r in grp])
        row["median_wall_time"] = _median([r.wall_time for r in grp])
        rows.append(row)
    return rows


def _write(path: Path, header: list[str], rows: Iterable[list]) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def emit_summary(records: Sequence[ExperimentRecord], out_dir: str | os.PathLike,
                 metadata: dict | None = None) -> dict[str, Path]:
    """Write ``raw.csv``, ``summary.csv``, the two timing files and ``config.json``.

    Rows keep the order in which records were produced, which the runners fix
    as method-major within each sweep point.
    """
    pkeys, mkeys = _check_uniform(records)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise IoError(f"output directory {out} is not writable")
    paths = {name: out / f"{name}.csv" for name in ("raw", "summary", "timing", "timing_summary")}

    _write(paths["raw"], ["method", *pkeys, "trial", *mkeys, "status", "warnings"],
           ([r.method, *r.params.values(), r.trial, *(r.metrics[k] for k in mkeys), r.status,
             "; ".join(r.warnings)] for r in records))
    summary = summarize(records)
    _write(paths["summary"], ["method", *pkeys, "n_trials", "n_failed", *(f"median_{k}" for k in mkeys)],
           ([s["method"], *(s[k] for k in pkeys), s["n_trials"], s["n_failed"],
             *(s[f"median_{k}"] for k in mkeys)] for s in summary))
    _write(paths["timing"], ["method", *pkeys, "trial", "wall_time"],
           ([r.method, *r.params.values(), r.trial, r.wall_time] for r in records))
    _write(paths["timing_summary"], ["method", *pkeys, "n_trials", "median_wall_time"],
           ([s["method"], *(s[k] for k in pkeys), s["n_trials"], s["median_wall_time"]] for s in summary))
    if metadata is not None:
        paths["config"] = out / "config.json"
        try:
            paths["config"].write_text(json.dumps(metadata, indent=2, sort_keys=True, default=_fmt) + "\n")
        except OSError as exc:
            raise IoError(f"cannot write {paths['config']}: {exc}") from exc
    return paths


def failure_tag(exc: BaseException) -> str:
    return type(exc).__name__ if isinstance(exc, CpdError) else f"error:{type(exc).__name__}"
