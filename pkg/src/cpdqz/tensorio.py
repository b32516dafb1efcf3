"""Plain-text tensor and factor files.

Tensor file::

    order N
    I1 I2 ... IN
    real            (or: complex)
    <one entry per line, column-major; complex entries as "re im">

Factor file (one per mode)::

    rows cols field
    <one matrix row per line; complex entries as interleaved "re im" pairs>
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import IoError, TensorFormatError
from .tensor import COMPLEX, REAL, DenseTensor


def _fmt(x: float) -> str:
    return repr(float(x))


def write_tensor(t: DenseTensor, path: str | os.PathLike) -> None:
    flat = t.flat
    lines = [f"order {t.order}", " ".join(str(n) for n in t.shape), t.field]
    if t.field == COMPLEX:
        lines.extend(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in flat)
    else:
        lines.extend(_fmt(x) for x in flat)
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_tensor(path: str | os.PathLike) -> DenseTensor:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3:
        raise TensorFormatError(f"{path}: truncated header")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "order":
        raise TensorFormatError(f"{path}: first line must be 'order N'")
    order = int(head[1])
    shape = tuple(int(s) for s in lines[1].split())
    if len(shape) != order:
        raise TensorFormatError(f"{path}: {len(shape)} extents listed for order {order}")
    fld = lines[2]
    if fld not in (REAL, COMPLEX):
        raise TensorFormatError(f"{path}: unknown field tag {fld!r}")
    body = lines[3:]
    size = int(np.prod(shape))
    if len(body) != size:
        raise TensorFormatError(f"{path}: expected {size} entries, found {len(body)}")
    try:
        vals = np.array([[float(v) for v in ln.split()] for ln in body])
    except ValueError as exc:
        raise TensorFormatError(f"{path}: {exc}") from exc
    width = 2 if fld == COMPLEX else 1
    if vals.ndim != 2 or vals.shape[1] != width:
        raise TensorFormatError(f"{path}: each entry needs {width} number(s)")
    flat = vals[:, 0] + 1j * vals[:, 1] if fld == COMPLEX else vals[:, 0]
    return DenseTensor.from_flat(flat, shape, fld)


def write_factor(u: np.ndarray, path: str | os.PathLike) -> None:
    u = np.asarray(u)
    fld = COMPLEX if np.iscomplexobj(u) else REAL
    lines = [f"{u.shape[0]} {u.shape[1]} {fld}"]
    for row in u:
        if fld == COMPLEX:
            lines.append(" ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in row))
        else:
            lines.append(" ".join(_fmt(x) for x in row))
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_factor(path: str | os.PathLike) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    rows, cols, fld = lines[0].split()
    rows, cols = int(rows), int(cols)
    vals = np.array([[float(v) for v in ln.split()] for ln in lines[1:1 + rows]]).reshape(rows, -1)
    if fld == COMPLEX:
        return vals[:, 0::2] + 1j * vals[:, 1::2]
    if vals.shape[1] != cols:
        raise TensorFormatError(f"{path}: expected {cols} columns")
    return vals
