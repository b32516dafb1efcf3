"""Dense tensors and the multilinear primitives used by the CPD algorithms.

Modes are numbered from 0. Every flattening is column-major: the first
index of a tensor (or the left-most index of a flattened group, see
:func:`general_unfold`) varies fastest.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BadIndex,
    BadMode,
    BadModePartition,
    DimMismatch,
    FieldMismatch,
    OrderMismatch,
    ZeroColumn,
)

REAL = "real"
COMPLEX = "complex"


def field_of(a: np.ndarray) -> str:
    return COMPLEX if np.iscomplexobj(a) else REAL


def _as_field(a, fld: str | None = None) -> np.ndarray:
    a = np.asarray(a)
    if fld is None:
        fld = field_of(a)
    dtype = np.complex128 if fld == COMPLEX else np.float64
    if fld == REAL and np.iscomplexobj(a):
        raise FieldMismatch("complex data cannot be stored in a real tensor")
    return a.astype(dtype, copy=False)


class DenseTensor:
    """Immutable N-way array over the real or complex field.

    Parameters
    ----------
    data : array_like
        N-dimensional array. Integer input is promoted to ``float64``.
    field : {"real", "complex"}, optional
        Scalar field tag. Inferred from ``data`` when omitted; a real array
        may be tagged ``"complex"`` (explicit promotion).
    """

    __slots__ = ("_data", "_field")

    def __init__(self, data, field: str | None = None):
        arr = _as_field(data, field)
        if arr.ndim < 1:
            raise OrderMismatch("a tensor has order >= 1")
        if any(n < 1 for n in arr.shape):
            raise DimMismatch(f"every extent must be positive, got {arr.shape}")
        arr = np.array(arr, copy=True)
        arr.flags.writeable = False
        self._data = arr
        self._field = field_of(arr)

    @classmethod
    def from_flat(cls, flat, shape: Sequence[int], field: str | None = None) -> DenseTensor:
        flat = np.asarray(flat).ravel()
        shape = tuple(int(n) for n in shape)
        if flat.size != int(np.prod(shape)):
            raise DimMismatch(f"{flat.size} entries do not fill shape {shape}")
        return cls(flat.reshape(shape, order="F"), field)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def order(self) -> int:
        return self._data.ndim

    @property
    def field(self) -> str:
        return self._field

    @property
    def flat(self) -> np.ndarray:
        """Entries in column-major order."""
        return self._data.ravel(order="F")

    def to_complex(self) -> DenseTensor:
        return DenseTensor(self._data, COMPLEX)

    def norm(self) -> float:
        return float(np.linalg.norm(self._data.ravel()))

    def __getitem__(self, idx):
        return self._data[idx]

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return (
            self._field == other._field
            and self.shape == other.shape
            and bool(np.array_equal(self._data, other._data))
        )

    def __hash__(self):
        return hash((self._field, self.shape, self._data.tobytes()))

    def __repr__(self):
        dims = "x".join(str(n) for n in self.shape)
        return f"DenseTensor({dims}, {self._field})"


@dataclass(frozen=True)
class CpdModel:
    """Rank-R canonical polyadic model ``sum_r w_r u_r^(1) o ... o u_r^(N)``.

    ``weights`` is optional; ``None`` means all ones.
    """

    factors: tuple[np.ndarray, ...]
    weights: np.ndarray | None = field(default=None)

    def __post_init__(self):
        facs = tuple(np.asarray(f) for f in self.factors)
        if not facs:
            raise DimMismatch("a CPD model needs at least one factor")
        if any(f.ndim != 2 for f in facs):
            raise DimMismatch("factors must be matrices")
        rank = facs[0].shape[1]
        if any(f.shape[1] != rank for f in facs):
            raise DimMismatch("all factors must share the column count R")
        cplx = any(np.iscomplexobj(f) for f in facs)
        if self.weights is not None:
            cplx = cplx or np.iscomplexobj(self.weights)
        dtype = np.complex128 if cplx else np.float64
        facs = tuple(f.astype(dtype) for f in facs)
        for n, f in enumerate(facs):
            if np.any(np.all(f == 0, axis=0)):
                raise ZeroColumn(f"factor {n} has a zero column")
        for f in facs:
            f.flags.writeable = False
        object.__setattr__(self, "factors", facs)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=dtype).ravel()
            if w.size != rank:
                raise DimMismatch("weights must have length R")
            w.flags.writeable = False
            object.__setattr__(self, "weights", w)

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1]

    @property
    def order(self) -> int:
        return len(self.factors)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def field(self) -> str:
        return field_of(self.factors[0])

    def absorb_weights(self) -> CpdModel:
        """Fold the weight vector into the first factor."""
        if self.weights is None:
            return self
        facs = list(self.factors)
        facs[0] = facs[0] * self.weights
        return CpdModel(tuple(facs))

    def normalized(self) -> CpdModel:
        """Unit-norm columns with the norm products moved to ``weights``."""
        w = np.ones(self.rank, dtype=self.factors[0].dtype)
        if self.weights is not None:
            w = w * self.weights
        facs = []
        for f in self.factors:
            nrm = np.linalg.norm(f, axis=0)
            facs.append(f / nrm)
            w = w * nrm
        return CpdModel(tuple(facs), w)


def _check_mode(mode: int, order: int) -> int:
    if not isinstance(mode, (int, np.integer)) or not 0 <= mode < order:
        raise BadMode(f"mode {mode} out of range for order {order}")
    return int(mode)


def unfold(t: DenseTensor, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding of an order-3 tensor.

    Columns are the mode fibers; of the two remaining modes the smaller one
    increments fastest.
    """
    if t.order != 3:
        raise OrderMismatch(f"unfold is defined for order-3 tensors, got order {t.order}")
    mode = _check_mode(mode, 3)
    return _kolda_unfold(t.data, mode)


def _kolda_unfold(a: np.ndarray, mode: int) -> np.ndarray:
    return np.reshape(np.moveaxis(a, mode, 0), (a.shape[mode], -1), order="F")


def _check_partition(order: int, row_modes, col_modes) -> tuple[list[int], list[int]]:
    rows = [int(m) for m in row_modes]
    cols = [int(m) for m in col_modes]
    if sorted(rows + cols) != list(range(order)):
        raise BadModePartition(
            f"{rows} and {cols} do not partition the modes of an order-{order} tensor"
        )
    return rows, cols


def general_unfold(t: DenseTensor, row_modes: Sequence[int], col_modes: Sequence[int]) -> np.ndarray:
    """Matricize ``t`` with ``row_modes`` indexing rows and ``col_modes`` columns.

    Within each list the modes increment slower from left to right, so the
    last listed mode is the fastest one. With ``row_modes=[1, 0]`` and
    ``col_modes=[3, 2]`` the entry ``t[i0, i1, i2, i3]`` lands at row
    ``I0*i1 + i0`` and column ``I2*i3 + i2``.
    """
    rows, cols = _check_partition(t.order, row_modes, col_modes)
    perm = rows[::-1] + cols[::-1]
    nr = int(np.prod([t.shape[m] for m in rows], dtype=np.int64))
    nc = int(np.prod([t.shape[m] for m in cols], dtype=np.int64))
    return np.reshape(np.transpose(t.data, perm), (nr, nc), order="F")


def refold(mat: np.ndarray, row_modes: Sequence[int], col_modes: Sequence[int],
           shape: Sequence[int]) -> DenseTensor:
    """Inverse of :func:`general_unfold`."""
    shape = tuple(int(n) for n in shape)
    rows, cols = _check_partition(len(shape), row_modes, col_modes)
    perm = rows[::-1] + cols[::-1]
    mat = np.asarray(mat)
    nr = int(np.prod([shape[m] for m in rows], dtype=np.int64))
    nc = int(np.prod([shape[m] for m in cols], dtype=np.int64))
    if mat.shape != (nr, nc):
        raise DimMismatch(f"matrix shape {mat.shape} does not match ({nr}, {nc})")
    permuted = np.reshape(mat, [shape[m] for m in perm], order="F")
    return DenseTensor(np.transpose(permuted, np.argsort(perm)))


def mode_product(t: DenseTensor, a: np.ndarray, mode: int) -> DenseTensor:
    """``t`` multiplied along ``mode`` by the matrix ``a`` (rows of ``a`` replace the extent)."""
    a = np.asarray(a)
    mode = _check_mode(mode, t.order)
    if a.ndim != 2 or a.shape[1] != t.shape[mode]:
        raise DimMismatch(
            f"matrix with shape {a.shape} cannot act on mode {mode} of extent {t.shape[mode]}"
        )
    if field_of(a) != t.field:
        raise FieldMismatch(f"{field_of(a)} matrix applied to {t.field} tensor")
    out = np.tensordot(a, t.data, axes=(1, mode))
    return DenseTensor(np.moveaxis(out, 0, mode))


def multi_mode_product(t: DenseTensor, mats: Sequence[np.ndarray | None]) -> DenseTensor:
    """Apply ``mats[n]`` along every mode ``n`` whose entry is not ``None``."""
    for n, a in enumerate(mats):
        if a is not None:
            t = mode_product(t, a, n)
    return t


def subtensor3(t: DenseTensor, n: int) -> DenseTensor:
    """Order-3 subtensor on modes (0, 1, n) with every other index fixed at 0."""
    if t.order < 3:
        raise OrderMismatch("subtensor3 needs an order >= 3 tensor")
    if not isinstance(n, (int, np.integer)) or not 2 <= n < t.order:
        raise BadMode(f"mode {n} out of range [2, {t.order - 1}]")
    idx = [0] * t.order
    idx[0] = idx[1] = idx[n] = slice(None)
    return DenseTensor(t.data[tuple(idx)])


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product; column r is ``kron(a[:, r], b[:, r])``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise DimMismatch(f"khatri_rao needs equal column counts, got {a.shape} and {b.shape}")
    return (a[:, None, :] * b[None, :, :]).reshape(a.shape[0] * b.shape[0], a.shape[1])


def khatri_rao_chain(mats: Sequence[np.ndarray]) -> np.ndarray:
    """``mats[0] ⊙ mats[1] ⊙ ... ⊙ mats[-1]`` (rows of the last matrix fastest)."""
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = khatri_rao(out, m)
    return out


def cpd_reconstruct(m: CpdModel, shape: Sequence[int] | None = None) -> DenseTensor:
    """Full tensor represented by ``m``."""
    if shape is not None and tuple(shape) != m.shape:
        raise DimMismatch(f"model shape {m.shape} does not match {tuple(shape)}")
    m = m.absorb_weights()
    u0 = m.factors[0]
    if m.order == 1:
        return DenseTensor(u0.sum(axis=1))
    # mode-0 unfolding U0 (U_{N-1} ⊙ ... ⊙ U_1)^T
    rest = khatri_rao_chain(m.factors[:0:-1])
    mat = u0 @ rest.T
    return DenseTensor(np.reshape(mat, m.shape, order="F"))


def reshape_to_order3(t: DenseTensor) -> DenseTensor:
    """Merge modes 2..N-1 into one (mode 2 fastest)."""
    if t.order < 3:
        raise OrderMismatch("reshape_to_order3 needs an order >= 3 tensor")
    i0, i1 = t.shape[:2]
    return DenseTensor(np.reshape(t.data, (i0, i1, -1), order="F"))


def frontal_slice(t: DenseTensor, k: int) -> np.ndarray:
    if t.order != 3:
        raise OrderMismatch("frontal slices are defined for order-3 tensors")
    if not isinstance(k, (int, np.integer)) or not 0 <= k < t.shape[2]:
        raise BadIndex(f"slice {k} out of range [0, {t.shape[2] - 1}]")
    return t.data[:, :, k].copy()
