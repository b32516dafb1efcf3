"""SVD, dominant singular triplet and orthogonal least squares (LAPACK-backed)."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .. import errors

RANK_TOL = 1e-10


class SvdResult(NamedTuple):
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def svd(a) -> SvdResult:
    """Thin SVD ``a = u @ diag(sigma) @ v.conj().T`` with ``sigma`` non-increasing."""
    a = np.asarray(a)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise errors.SvdNoConvergence(str(exc)) from exc
    return SvdResult(u, s, vh.conj().T)


def leading_left_singular_vectors(a, r: int) -> np.ndarray:
    """The ``r`` dominant left singular vectors of ``a``.

    Wide matrices go through the eigendecomposition of the Gram matrix
    ``a a^H``, which is much cheaper than a full SVD when ``a`` has many more
    columns than rows.
    """
    a = np.asarray(a)
    m, n = a.shape
    if n <= 2 * m:
        return svd(a).u[:, :r]
    w, v = np.linalg.eigh(a @ a.conj().T)
    return v[:, ::-1][:, :r]


def best_rank1(a) -> tuple[np.ndarray, float, np.ndarray]:
    """Dominant singular triplet ``(u, sigma, v)``; ``sigma * outer(u, v.conj())`` approximates ``a``."""
    a = np.asarray(a)
    if a.size == 0 or not np.any(a):
        raise errors.ZeroInput("best rank-1 approximation of a zero matrix")
    u, s, v = svd(a)
    return u[:, 0], float(s[0]), v[:, 0]


def lstsq(a, b, *, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Minimizer of ``||a x - b||_F`` via a QR factorization of ``a``.

    Raises :class:`~cpdqz.errors.RankDeficient` when the smallest singular
    value of ``a`` is at most ``rank_tol`` times the largest.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.shape[0] != a.shape[0]:
        raise errors.DimMismatch(f"incompatible least-squares shapes {a.shape} and {b.shape}")
    m, n = a.shape
    if m < n:
        raise errors.RankDeficient(f"underdetermined system ({m} rows < {n} columns)")
    q, r = np.linalg.qr(a)
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[0] == 0 or sv[-1] <= rank_tol * sv[0]:
        raise errors.RankDeficient(
            f"matrix is rank deficient (sigma_min/sigma_max = {sv[-1] / sv[0] if sv[0] else 0:.2e})"
        )
    return scipy.linalg.solve_triangular(r, q.conj().T @ b)
