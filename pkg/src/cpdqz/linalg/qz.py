"""Generalized Schur (QZ) decomposition and generalized eigenvectors."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import errors
from . import _backend

EPS = 2.0 ** -52
SWEEPS_PER_ROW = 30


@dataclass(frozen=True)
class QzResult:
    """Unitary ``q``, ``z`` with ``s = q @ m1 @ z`` and ``t = q @ m2 @ z`` upper triangular.

    ``promoted`` is set when a real pencil had to be processed in complex
    arithmetic.
    """

    q: np.ndarray
    z: np.ndarray
    s: np.ndarray
    t: np.ndarray
    sweeps: int = 0
    promoted: bool = False

    @property
    def alpha(self) -> np.ndarray:
        return np.diag(self.s).copy()

    @property
    def beta(self) -> np.ndarray:
        return np.diag(self.t).copy()

    @property
    def eigen_ratios(self) -> list[tuple[complex, complex]]:
        return list(zip(self.alpha.tolist(), self.beta.tolist()))

    @property
    def eigenvalues(self) -> np.ndarray:
        """``alpha / beta`` with ``inf`` where ``beta == 0``."""
        a, b = self.alpha, self.beta
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(b != 0, a / np.where(b != 0, b, 1), np.inf)


def _check_pencil(m1, m2) -> tuple[np.ndarray, np.ndarray]:
    m1 = np.asarray(m1)
    m2 = np.asarray(m2)
    if m1.ndim != 2 or m1.shape[0] != m1.shape[1] or m1.shape != m2.shape:
        raise errors.DimMismatch(f"pencil needs two square matrices of equal size, got {m1.shape} and {m2.shape}")
    if m1.shape[0] == 0:
        raise errors.DimMismatch("empty pencil")
    if np.iscomplexobj(m1) != np.iscomplexobj(m2):
        raise errors.FieldMismatch("pencil matrices must share a scalar field")
    dtype = np.complex128 if np.iscomplexobj(m1) else np.float64
    return m1.astype(dtype), m2.astype(dtype)


def hessenberg_triangular(m1, m2, *, kernels=None):
    """Unitary ``q0``, ``z0`` with ``q0 m1 z0`` upper Hessenberg and ``q0 m2 z0`` upper triangular.

    Returns
    -------
    q0, z0, h, t0 : ndarray
    """
    m1, m2 = _check_pencil(m1, m2)
    kernels = kernels or _backend.kernels
    n = m1.shape[0]
    if np.any(np.tril(m2, -1) != 0):
        qm, t0 = np.linalg.qr(m2)
        q0 = np.ascontiguousarray(qm.conj().T)
        h = q0 @ m1
    else:
        q0 = np.eye(n, dtype=m1.dtype)
        t0 = m2.copy()
        h = m1.copy()
    h = np.ascontiguousarray(h)
    t0 = np.ascontiguousarray(t0)
    z0 = np.eye(n, dtype=m1.dtype)
    kernels.ht_reduce(h, t0, q0, z0)
    return q0, z0, h, t0


def qz_decompose(m1, m2, *, complex_fallback: bool = False, kernels=None) -> QzResult:
    """Generalized Schur decomposition of the pencil ``(m1, m2)``.

    A real pencil is processed in real arithmetic. If it turns out to have a
    complex conjugate eigenvalue pair, :class:`~cpdqz.errors.RealPencilComplexEigenvalues`
    is raised unless ``complex_fallback`` is true, in which case the pencil
    is redone in complex arithmetic and the result is flagged ``promoted``.

    The diagonal of ``t`` is made real and non-negative. No reordering of
    the eigenvalues is performed.
    """
    m1, m2 = _check_pencil(m1, m2)
    kernels = kernels or _backend.kernels
    n = m1.shape[0]
    q, z, s, t = hessenberg_triangular(m1, m2, kernels=kernels)
    status, loc, sweeps = kernels.qz_iterate(s, t, q, z, SWEEPS_PER_ROW * n)
    if status == kernels.COMPLEX_PAIR:
        if not complex_fallback:
            raise errors.RealPencilComplexEigenvalues(int(loc))
        res = qz_decompose(m1.astype(np.complex128), m2.astype(np.complex128), kernels=kernels)
        return QzResult(res.q, res.z, res.s, res.t, res.sweeps + sweeps, promoted=True)
    if status == kernels.NO_CONVERGENCE:
        raise errors.QzNoConvergence(f"QZ iteration did not converge within {SWEEPS_PER_ROW * n} sweeps")
    d = np.diag(t)
    mag = np.abs(d)
    ph = np.where(mag > 0, d / np.where(mag > 0, mag, 1), 1)
    if np.any(ph != 1):
        fix = ph.conj()
        z = z * fix
        s = s * fix
        t = t * fix
        t[np.diag_indices(n)] = mag
    return QzResult(q, z, s, t, sweeps)


@dataclass(frozen=True)
class EigvecResult:
    vectors: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    qz: QzResult
    warnings: list[str] = field(default_factory=list)


def generalized_eigvecs(m1, m2, *, complex_fallback: bool = False, sep_tol: float = 1e-10,
                        kernels=None) -> EigvecResult:
    """Right generalized eigenvectors ``v_r`` with ``(beta_r m1 - alpha_r m2) v_r = 0``.

    Computed from the QZ decomposition by back substitution on the
    triangular pencil. Columns have unit norm and follow the order of the
    Schur form.

    Nearly coinciding eigenvalues (chordal distance below ``sep_tol``) do not
    raise; the result carries an ``IllConditionedEigenvectors`` note instead.
    """
    m1, m2 = _check_pencil(m1, m2)
    kernels = kernels or _backend.kernels
    qz = qz_decompose(m1, m2, complex_fallback=complex_fallback, kernels=kernels)
    alpha, beta = qz.alpha, qz.beta
    n1 = np.linalg.norm(m1)
    n2 = np.linalg.norm(m2)
    tol = 100 * EPS * m1.shape[0]
    if np.any((np.abs(alpha) <= tol * n1) & (np.abs(beta) <= tol * n2)):
        raise errors.SingularPencil("pencil has alpha = beta = 0 (singular)")
    notes = []
    # chordal distance between eigenvalues on the projective line
    ab = np.stack([alpha / max(n1, 1e-300), beta / max(n2, 1e-300)])
    ab = ab / np.linalg.norm(ab, axis=0)
    n = len(alpha)
    for i in range(n):
        for j in range(i + 1, n):
            d = abs(ab[0, i] * ab[1, j] - ab[1, i] * ab[0, j])
            if d <= sep_tol:
                notes.append(
                    f"{errors.IllConditionedEigenvectors.__name__}: eigenvalues {i} and {j} "
                    f"coincide to chordal distance {d:.2e}"
                )
    y, perturbed = kernels.tri_eigvecs(qz.s, qz.t, EPS)
    if perturbed:
        notes.append(
            f"{errors.IllConditionedEigenvectors.__name__}: {perturbed} near-zero pivots perturbed"
        )
    v = qz.z @ y
    v = v / np.linalg.norm(v, axis=0)
    return EigvecResult(v, alpha, beta, qz, notes)
